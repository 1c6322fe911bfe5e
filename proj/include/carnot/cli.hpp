#pragma once

// Command-line front end. run() is the whole program minus process plumbing,
// so it can be driven in-process.
//
// Exit codes: 0 success, 1 usage or parse error, 2 numerical failure,
// 3 missing or unwritable file.

#include "carnot/io.hpp"
#include "carnot/tsp.hpp"
#include "carnot/verify.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace carnot::cli {

enum ExitCode : int { Ok = 0, Usage = 1, Numerical = 2, FileError = 3 };

struct Common {
  std::string group = "heisenberg(1)";
  std::string metric;
  double eta = 1.0;
  std::string out;
  unsigned threads = 1;
  std::uint64_t seed = 1;
};

/// A builtin name, or a path to a JSON group spec (anything ending in .json
/// or naming an existing file).
inline AlgebraPtr resolve_group(const std::string& g) {
  const bool is_file = (g.size() > 5 && g.ends_with(".json")) || std::filesystem::is_regular_file(g);
  return is_file ? read_group_spec(g) : builtin(g);
}

/// "inf": weight 1 on layer 1 and eta on the others; "hs": Hebisch-Sikora gauge of radius eta.
inline HomogeneousMetric resolve_metric(const std::string& kind, double eta, const AlgebraPtr& alg) {
  if (kind == "hs") return HomogeneousMetric::hebisch_sikora(eta);
  if (kind == "inf" || kind.empty()) {
    std::vector<double> l(static_cast<std::size_t>(alg->step()), eta);
    l[0] = 1.0;
    return HomogeneousMetric::infinity(std::move(l));
  }
  throw InvalidArgument("unknown metric '" + kind + "' (expected inf or hs)");
}

inline void header(Report& r, const char* command, const AlgebraPtr& alg, const HomogeneousMetric& m) {
  r.add("command", command).add("group", alg->name()).add("metric", m.describe());
}

inline std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

inline std::map<std::string, double> parse_params(const std::vector<std::string>& raw) {
  std::map<std::string, double> out;
  for (const auto& kv : raw) {
    const auto eq = kv.find('=');
    double v = 0.0;
    if (eq == std::string::npos || eq == 0 || !detail::parse_double(std::string_view(kv).substr(eq + 1), v)) {
      throw InvalidArgument("--param expects key=value, got '" + kv + "'");
    }
    out[kv.substr(0, eq)] = v;
  }
  return out;
}

class ParamSet {
 public:
  explicit ParamSet(std::map<std::string, double> given) : given_(std::move(given)) {}

  double get(const std::string& key, double fallback) {
    used_[key] = given_.count(key) ? given_.at(key) : fallback;
    return used_[key];
  }

  void finish() const {
    for (const auto& [k, v] : given_) {
      if (!used_.count(k)) throw InvalidArgument("parameter '" + k + "' does not apply to this lemma");
    }
  }

  const std::map<std::string, double>& used() const { return used_; }

 private:
  std::map<std::string, double> given_;
  std::map<std::string, double> used_;
};

inline std::size_t as_count(double x, const char* what) {
  if (!(x >= 0.0) || x != std::floor(x) || x > 1e15) {
    throw InvalidArgument(std::string(what) + " must be a nonnegative integer");
  }
  return static_cast<std::size_t>(x);
}

inline const std::vector<std::string>& lemma_ids() {
  static const std::vector<std::string> ids{"bch-bound",     "close-lines",        "beta-balls",  "euc-ball",
                                            "pi-nh",         "nonhorizontal",      "curvature-3", "curvature-4",
                                            "curvature-5",   "hs-taylor",          "sufficiency-triple",
                                            "proj-order"};
  return ids;
}

inline bool lemma_needs_hs(const std::string& id) {
  return id.starts_with("curvature") || id == "hs-taylor" || id == "sufficiency-triple" || id == "proj-order";
}

inline InequalityReport run_lemma(const std::string& id, const HomogeneousMetric& m, const AlgebraPtr& alg,
                                  ParamSet& p, const VerifyOptions& opt) {
  if (id == "bch-bound") return check_bch_bound(alg, p.get("eta", 0.5), opt);
  if (id == "close-lines") return check_close_lines(m, alg, p.get("eta", 0.1), p.get("ell", 1.0), opt);
  if (id == "beta-balls") return check_beta_balls(m, alg, opt);
  if (id == "euc-ball") return check_euc_ball(m, alg, p.get("eta0", 0.1), opt);
  if (id == "pi-nh") return check_pi_nh(m, alg, opt);
  if (id == "nonhorizontal") return check_nonhorizontal(m, alg, opt);
  if (id.starts_with("curvature-")) {
    return check_curvature(m, alg, p.get("lambda", 0.2), id.back() - '0', opt);
  }
  if (id == "hs-taylor") return check_hs_taylor(m, alg, p.get("alpha", 0.3), p.get("y_max", 0.05), opt);
  if (id == "sufficiency-triple") {
    return check_sufficiency_triple(m, alg, p.get("alpha", 0.3),
                                    as_count(p.get("corollary_samples", 64), "corollary_samples"), opt);
  }
  if (id == "proj-order") return check_proj_order(m, alg, p.get("lambda", 0.5), p.get("mu", 0.01), opt);
  throw InvalidArgument("unknown lemma '" + id + "'");
}

inline void add_inequality_report(Report& r, const InequalityReport& rep) {
  r.add("samples", rep.samples)
      .add("seed", std::to_string(rep.seed))
      .add("max", rep.max)
      .add("p99", rep.p99)
      .add("p999", rep.p999)
      .add("fitted_constant", rep.fitted_constant)
      .add("reference_constant", rep.reference_constant)
      .add("violations", rep.violations)
      .add("hard_violations", rep.hard_violations)
      .add("degenerate", rep.degenerate)
      .add("degenerate_reason", rep.degenerate_reason);
  for (const auto& [k, v] : rep.extras) r.add(k, v);
}

/// Parses argv and runs one subcommand, writing the report to `out` (or to
/// --out) and diagnostics to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Carnot group geometry toolkit: beta numbers, Carleson sums, tours and lemma checks", "carnot"};
  app.require_subcommand(1);
  Common c;

  auto common = [&](CLI::App* sub, bool metric, bool seed) {
    sub->add_option("--group", c.group, "builtin group name or JSON group spec path")->capture_default_str();
    if (metric) {
      sub->add_option("--metric", c.metric, "inf or hs");
      sub->add_option("--eta", c.eta, "hs: gauge radius; inf: weight of layers 2..s")->capture_default_str();
    }
    if (seed) sub->add_option("--seed", c.seed, "random seed")->capture_default_str();
    sub->add_option("--out", c.out, "write the report here instead of stdout");
  };

  std::string points, center, csv, lemma = "bch-bound", curve = "circle";
  double radius = 0.0, amplitude = 0.25, sigma = 0.01;
  int depth_min = 0, depth_max = 6, count = 256, corners = 4;
  std::size_t samples = 10000;
  double reference = std::numeric_limits<double>::infinity();
  std::vector<std::string> params;

  auto* beta = app.add_subcommand("beta", "stratified and classical beta numbers of a point set in a ball");
  common(beta, true, true);
  beta->add_option("--points", points, "headerless CSV, one point per row")->required();
  beta->add_option("--center", center, "ball center as comma-separated coordinates (default: first point)");
  beta->add_option("--radius", radius, "ball radius")->required();

  auto* carleson = app.add_subcommand("carleson", "multiscale Carleson sum and gamma_hat of a point set");
  common(carleson, true, false);
  carleson->add_option("--points", points, "headerless CSV, one point per row")->required();
  carleson->add_option("--depth-min", depth_min)->capture_default_str();
  carleson->add_option("--depth-max", depth_max)->capture_default_str();
  carleson->add_option("--threads", c.threads, "worker cap, 0 = all cores")->capture_default_str();
  carleson->add_option("--csv", csv, "also write the per-level table to this CSV file");
  std::optional<std::uint64_t> net_seed;
  carleson->add_option("--shuffle-seed", net_seed, "scan the nets in a seeded random order");

  auto* tour = app.add_subcommand("tour", "farthest-insertion tour; with --depth-max also the sufficiency ratio");
  common(tour, true, false);
  tour->add_option("--points", points, "headerless CSV, one point per row")->required();
  auto* tour_dmin = tour->add_option("--depth-min", depth_min);
  auto* tour_dmax = tour->add_option("--depth-max", depth_max);
  tour->add_option("--threads", c.threads, "worker cap, 0 = all cores")->capture_default_str();

  auto* verify = app.add_subcommand("verify", "randomized check of one quantitative lemma");
  common(verify, true, true);
  verify->add_option("--lemma", lemma, "lemma id")->check(CLI::IsMember(lemma_ids()))->capture_default_str();
  verify->add_option("--samples", samples)->capture_default_str();
  verify->add_option("--threads", c.threads, "worker cap, 0 = all cores")->capture_default_str();
  verify->add_option("--param", params, "lemma parameter key=value (repeatable)");
  verify->add_option("--reference", reference, "count ratios above this constant as violations");

  auto* calibrate = app.add_subcommand("calibrate", "largest grid parameter with no sampled subadditivity failure");
  common(calibrate, true, true);
  calibrate->add_option("--samples", samples)->capture_default_str();

  auto* sample = app.add_subcommand("sample", "points on a synthetic curve, as CSV");
  common(sample, true, true);
  sample->add_option("--curve", curve)
      ->check(CLI::IsMember({"segment", "circle", "zigzag", "noisy-segment"}))
      ->capture_default_str();
  sample->add_option("--count", count, "number of samples")->capture_default_str();
  sample->add_option("--radius", radius, "circle radius (default 1)");
  sample->add_option("--corners", corners)->capture_default_str();
  sample->add_option("--amplitude", amplitude)->capture_default_str();
  sample->add_option("--sigma", sigma, "noisy-segment noise level")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? Ok : Usage;
  }

  try {
    std::ostringstream doc;
    const auto alg = resolve_group(c.group);
    CLI::App* chosen = app.get_subcommands().front();
    const std::string name = chosen->get_name();
    std::string metric_kind = c.metric;
    if (name == "verify" && metric_kind.empty() && lemma_needs_hs(lemma)) metric_kind = "hs";
    const auto m = resolve_metric(metric_kind, c.eta, alg);

    if (name == "beta") {
      if (!(radius > 0.0)) throw InvalidArgument("--radius must be positive");
      const auto E = read_points(alg, points);
      if (E.empty()) throw MalformedInput(points + ": no points");
      GroupElement x = E.front();
      if (!center.empty()) {
        auto v = parse_vector(center);
        if (static_cast<int>(v.size()) != alg->dim()) throw InvalidArgument("--center has the wrong dimension");
        x = GroupElement(alg, Coords(v.begin(), v.end()));
      }
      BetaConfig cfg;
      cfg.seed = c.seed;
      const auto rep = beta_hat(m, E, x, radius, cfg);
      Report r;
      header(r, "beta", alg, m);
      r.add("seed", std::to_string(c.seed)).add("points", E.size());
      r.add("center", std::vector<double>(x.coords().begin(), x.coords().end())).add("radius", radius);
      r.add("in_ball", rep.in_ball).add("beta_hat", rep.beta_hat).add("beta_classical", rep.beta_classical);
      r.add("per_layer_sup", rep.per_layer_sup);
      if (rep.best_line) {
        const auto& b = rep.best_line->base().coords();
        r.add("line_base", std::vector<double>(b.begin(), b.end())).add("line_direction", rep.best_line->direction());
      }
      r.add("starts_used", rep.starts_used).add("evaluations", rep.evaluations).add("converged", rep.converged);
      r.write(doc);
    } else if (name == "carleson") {
      const auto E = read_points(alg, points);
      if (E.empty()) throw MalformedInput(points + ": no points");
      CarlesonConfig cfg;
      cfg.threads = c.threads;
      cfg.net_shuffle_seed = net_seed;
      const auto res = carleson_sum(m, E, depth_min, depth_max, cfg);
      const double diam = diameter(m, E);
      Report r;
      header(r, "carleson", alg, m);
      r.add("points", E.size()).add("depth_min", depth_min).add("depth_max", depth_max);
      r.add("net_order", net_seed ? "shuffle(" + std::to_string(*net_seed) + ")" : std::string("input"));
      r.add("diameter", diam).add("total", res.total).add("gamma_hat", diam + res.total);
      r.write(doc);
      std::ostringstream table;
      table << "level,balls,sum\n";
      for (const auto& lv : res.levels) table << lv.level << ',' << lv.balls << ',' << fmt_double(lv.sum) << '\n';
      doc << "# levels\n" << table.str();
      if (!csv.empty()) {
        std::ofstream f(csv, std::ios::binary);
        if (!(f << table.str())) throw MissingFile("cannot write " + csv);
      }
    } else if (name == "tour") {
      const auto E = read_points(alg, points);
      if (E.empty()) throw MalformedInput(points + ": no points");
      const auto t = farthest_insertion(m, E);
      Report r;
      header(r, "tour", alg, m);
      r.add("points", E.size()).add("cost", t.cost).add("diameter", diameter(m, E));
      if (tour_dmax->count() > 0 || tour_dmin->count() > 0) {
        CarlesonConfig cfg;
        cfg.threads = c.threads;
        const auto s = sufficiency_ratio(m, E, depth_min, depth_max, cfg);
        r.add("depth_min", depth_min).add("depth_max", depth_max);
        r.add("gamma_hat", s.gamma_hat).add("ratio", s.ratio);
      }
      r.add("ordering", join(t.ordering));
      r.write(doc);
    } else if (name == "verify") {
      VerifyOptions opt;
      opt.samples = samples;
      opt.seed = c.seed;
      opt.threads = c.threads;
      opt.reference = reference;
      ParamSet p(parse_params(params));
      opt.max_attempts = as_count(p.get("max_attempts", static_cast<double>(opt.max_attempts)), "max_attempts");
      const auto rep = run_lemma(lemma, m, alg, p, opt);
      p.finish();
      Report r;
      header(r, "verify", alg, m);
      r.add("lemma", rep.lemma);
      for (const auto& [k, v] : p.used()) r.add("param." + k, v);
      add_inequality_report(r, rep);
      r.write(doc);
    } else if (name == "calibrate") {
      const auto kind = metric_kind == "hs" ? HomogeneousMetric::Kind::HebischSikora : HomogeneousMetric::Kind::Infinity;
      const auto res = carnot::calibrate(kind, alg, samples, c.seed);
      Report r;
      r.add("command", "calibrate").add("group", alg->name()).add("kind", metric_kind == "hs" ? "hs" : "inf");
      r.add("samples", samples).add("seed", std::to_string(c.seed));
      r.add("parameter", res.parameter).add("metric", res.metric.describe());
      r.write(doc);
      doc << "# census\nparameter,violations\n";
      for (const auto& [param, v] : res.census) doc << fmt_double(param) << ',' << v << '\n';
    } else {
      std::vector<GroupElement> pts;
      Report r;
      header(r, "sample", alg, m);
      if (curve == "noisy-segment") {
        pts = noisy_segment(alg, count, sigma, c.seed);
        r.add("curve", "noisy-segment").add("sigma", sigma).add("seed", std::to_string(c.seed));
        r.add("chain_length", chain_length(m, pts));
      } else {
        CurveSpec spec;
        if (curve == "segment") {
          std::vector<double> e1(static_cast<std::size_t>(alg->layer_size(1)), 0.0);
          e1[0] = 1.0;
          spec = SegmentCurve{GroupElement::identity(alg), GroupElement::horizontal(alg, e1)};
        } else if (curve == "circle") {
          spec = CircleLiftCurve{alg, radius > 0.0 ? radius : 1.0};
        } else {
          spec = ZigzagCurve{alg, corners, amplitude};
        }
        auto s = sample_curve(spec, count, m);
        pts = std::move(s.points);
        r.add("curve", s.descriptor).add("chain_length", s.chain_length);
      }
      r.add("count", pts.size());
      for (const auto& [k, v] : r.entries()) doc << "# " << k << ": " << v << '\n';
      write_points(doc, pts);
    }

    if (c.out.empty()) {
      out << doc.str();
    } else {
      std::ofstream f(c.out, std::ios::binary);
      if (!(f << doc.str())) throw MissingFile("cannot write " + c.out);
    }
    return Ok;
  } catch (const MissingFile& e) {
    err << "error: " << e.what() << '\n';
    return FileError;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return Numerical;
  } catch (const MalformedInput& e) {
    err << "parse error: " << e.what() << '\n';
    return Usage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return Usage;
  }
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"carnot"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace carnot::cli
