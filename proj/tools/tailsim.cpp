// Command-line experiment runner: simulates one (target, method, tail)
// configuration and emits the assembled tail CDF as CSV, overlays exact
// curves, or produces a method-comparison table.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tailsim/tailsim.hpp"

namespace {

using namespace tailsim;

struct Experiment {
  std::string target = "sum-uniform";
  std::size_t n = 3;
  double alpha = 0.999;
  double beta = 0.9999;
  std::string tail = "right";
  double epsilon = 0.0;
  std::size_t samples = 1000;
  std::uint64_t seed = 1;
  std::string method = "no-rejection";
  std::string region = "tangent";
  std::size_t resolution = 64;
  std::size_t jobs = 1;
};

struct Problem {
  TargetFunction target;
  JointModel model;
  TailSpec spec;
};

Problem build_problem(const Experiment& e) {
  Problem p;
  if (e.target == "sum-uniform") {
    p.target = sum_target(e.n);
    p.model = uniform_box(e.n);
  } else if (e.target == "product-uniform") {
    p.target = product_target(e.n);
    p.model = uniform_box(e.n);
  } else if (e.target == "reliability") {
    if (e.n != 3) throw ConfigError("reliability target is three-dimensional");
    auto r = reliability_target(e.alpha, e.beta);
    p.target = std::move(r.target);
    p.model = std::move(r.model);
  } else {
    throw ConfigError("unknown target '" + e.target +
                      "' (expected sum-uniform, product-uniform or reliability)");
  }
  TailSide side;
  if (e.tail == "left")
    side = TailSide::left;
  else if (e.tail == "right")
    side = TailSide::right;
  else
    throw ConfigError("unknown tail '" + e.tail + "' (expected left or right)");
  p.spec = make_tail_spec(p.target, p.model, side, e.epsilon);
  return p;
}

RegionKind parse_region(const std::string& s) {
  if (s == "tangent") return RegionKind::tangent;
  if (s == "secant") return RegionKind::secant;
  if (s == "min-corner") return RegionKind::min_corner;
  throw ConfigError("unknown region '" + s + "' (expected tangent, secant or min-corner)");
}

SimulationResult run_method(const Experiment& e, const Problem& p) {
  const Rng root(e.seed);
  if (e.method == "no-rejection")
    return run_tail_simulation(p.target, p.model, p.spec, e.samples, root, e.jobs);
  if (e.method == "equal-scores") {
    auto tables = build_sampling_tables(p.target, p.model, p.spec, e.resolution);
    SimulationResult out;
    out.points.resize(e.samples);
    detail::parallel_for(e.samples, e.jobs, [&](std::size_t j) {
      Rng rng = root.split(j);
      out.points[j] = draw_equal_score_sample(tables, rng);
    });
    out.stats.m_total = e.samples;
    out.stats.m_accepted = e.samples;
    out.stats.count_rejection = 0.0;
    out.stats.volume_rejection = 0.0;
    return out;
  }
  if (e.method == "reduced")
    return run_reduced_rejection(p.target, p.model, p.spec, e.samples, root,
                                 parse_region(e.region), e.jobs);
  if (e.method == "mc") return run_standard_mc(p.target, p.model, p.spec, e.samples, root, e.jobs);
  throw ConfigError("unknown method '" + e.method +
                    "' (expected no-rejection, equal-scores, reduced or mc)");
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_run_csv(const std::string& path, const TailCdf& cdf) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
  out << "z,cdf,weight\n";
  for (const auto& pt : cdf.points)
    out << fmt17(pt.z) << ',' << fmt17(pt.cdf) << ',' << fmt17(pt.weight) << '\n';
}

/// Exact conditional-on-the-tail CDF of the configured target.
std::function<double(double)> conditional_oracle(const Experiment& e, const Problem& p) {
  std::function<double(double)> full;
  if (e.target == "sum-uniform") {
    const unsigned n = static_cast<unsigned>(e.n);
    full = [n](double z) { return irwin_hall_cdf(n, z); };
  } else if (e.target == "product-uniform") {
    const unsigned n = static_cast<unsigned>(e.n);
    full = [n](double z) { return product_uniform_cdf(n, z); };
  } else if (e.target == "reliability") {
    const double a = e.alpha, b = e.beta;
    full = [a, b](double z) { return reliability_cdf(z, a, b); };
  } else {
    throw ConfigError("no exact oracle for target '" + e.target + "'");
  }
  const TailSpec spec = p.spec;
  const double f_lo =
      spec.side == TailSide::left ? 0.0 : full(spec.z_max - spec.epsilon);
  const double f_hi = spec.side == TailSide::left ? full(spec.z_min + spec.epsilon) : 1.0;
  return [full, f_lo, f_hi](double z) { return (full(z) - f_lo) / (f_hi - f_lo); };
}

struct StatsLinePrinter {
  void operator()(const SimulationResult& res, const TailCdf& cdf, double ms) const {
    std::printf("points=%zu\n", cdf.points.size());
    std::printf("tail_mass=%s\n", fmt17(cdf.tail_mass).c_str());
    std::printf("count_rejection=%s\n", fmt17(res.stats.count_rejection).c_str());
    if (res.stats.volume_rejection)
      std::printf("volume_rejection=%s\n", fmt17(*res.stats.volume_rejection).c_str());
    std::printf("runtime_ms=%.3f\n", ms);
  }
};

int cmd_run(const Experiment& e, const std::string& out_path) {
  const Problem p = build_problem(e);
  const auto t0 = std::chrono::steady_clock::now();
  const SimulationResult res = run_method(e, p);
  const auto t1 = std::chrono::steady_clock::now();
  if (res.points.empty()) throw std::runtime_error("no tail hits: nothing to assemble");
  const TailCdf cdf = assemble_tail_cdf(res.points, res.stats.m_total, p.spec.side);
  if (!out_path.empty()) write_run_csv(out_path, cdf);
  StatsLinePrinter{}(res, cdf, std::chrono::duration<double, std::milli>(t1 - t0).count());
  return 0;
}

int cmd_compare(const Experiment& e, const std::string& out_path, double tol) {
  const Problem p = build_problem(e);
  const auto oracle = conditional_oracle(e, p);
  const SimulationResult res = run_method(e, p);
  if (res.points.empty()) throw std::runtime_error("no tail hits: nothing to compare");
  const TailCdf cond = conditional(assemble_tail_cdf(res.points, res.stats.m_total, p.spec.side));
  const double sup = sup_distance(cond, oracle);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open output file '" + out_path + "'");
    out << "z,cdf_sim,cdf_exact,abs_err\n";
    for (const auto& pt : cond.points) {
      const double exact = oracle(pt.z);
      out << fmt17(pt.z) << ',' << fmt17(pt.cdf) << ',' << fmt17(exact) << ','
          << fmt17(std::fabs(pt.cdf - exact)) << '\n';
    }
  }
  std::printf("sup_distance=%s\n", fmt17(sup).c_str());
  return sup < tol ? 0 : 3;
}

std::map<std::string, std::string> parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    auto sep = line.find('=');
    if (sep == std::string::npos) sep = line.find(':');
    if (sep == std::string::npos)
      throw ConfigError("malformed config line " + std::to_string(lineno) + ": '" + line + "'");
    const std::string key = trim(line.substr(0, sep));
    const std::string value = trim(line.substr(sep + 1));
    if (key.empty() || value.empty())
      throw ConfigError("malformed config line " + std::to_string(lineno) + ": '" + line + "'");
    kv[key] = value;
  }
  return kv;
}

int cmd_report(const std::string& config_path, const Experiment& overrides,
               const std::vector<std::string>& given_flags) {
  Experiment e = overrides;
  std::size_t seed_count = 10;
  std::vector<std::string> methods{"no-rejection", "equal-scores", "reduced", "mc"};
  if (!config_path.empty()) {
    auto was_given = [&](const std::string& flag) {
      return std::find(given_flags.begin(), given_flags.end(), flag) != given_flags.end();
    };
    for (const auto& [key, value] : parse_config(config_path)) {
      try {
        if (key == "target" && !was_given("target")) e.target = value;
        else if (key == "n" && !was_given("n")) e.n = std::stoul(value);
        else if (key == "alpha" && !was_given("alpha")) e.alpha = std::stod(value);
        else if (key == "beta" && !was_given("beta")) e.beta = std::stod(value);
        else if (key == "tail" && !was_given("tail")) e.tail = value;
        else if (key == "epsilon" && !was_given("epsilon")) e.epsilon = std::stod(value);
        else if (key == "samples" && !was_given("samples")) e.samples = std::stoul(value);
        else if (key == "seed" && !was_given("seed")) e.seed = std::stoull(value);
        else if (key == "region" && !was_given("region")) e.region = value;
        else if (key == "resolution" && !was_given("resolution")) e.resolution = std::stoul(value);
        else if (key == "jobs" && !was_given("jobs")) e.jobs = std::stoul(value);
        else if (key == "seeds") seed_count = std::stoul(value);
        else if (key == "methods") {
          methods.clear();
          std::stringstream ss(value);
          std::string item;
          while (std::getline(ss, item, ',')) {
            if (!item.empty()) methods.push_back(item);
          }
          if (methods.empty()) throw ConfigError("methods list is empty");
        }
        else if (key == "target" || key == "n" || key == "alpha" || key == "beta" ||
                 key == "tail" || key == "epsilon" || key == "samples" || key == "seed" ||
                 key == "region" || key == "resolution" || key == "jobs") {
          // flag override wins
        } else {
          throw ConfigError("unknown config key '" + key + "'");
        }
      } catch (const std::invalid_argument&) {
        throw ConfigError("malformed config value for key '" + key + "'");
      } catch (const std::out_of_range&) {
        throw ConfigError("malformed config value for key '" + key + "'");
      }
    }
  }
  if (seed_count < 1) throw ConfigError("seeds must be >= 1");
  const Problem p = build_problem(e);

  std::printf("target=%s n=%zu tail=%s epsilon=%s samples=%zu seeds=%zu base_seed=%llu\n",
              e.target.c_str(), e.n, e.tail.c_str(), fmt17(e.epsilon).c_str(), e.samples,
              seed_count, static_cast<unsigned long long>(e.seed));
  std::printf("%-14s %14s %14s %14s %12s %12s\n", "method", "eff_samples", "tail_mass", "stderr",
              "count_rej", "time_ms");

  for (const std::string& method : methods) {
    Experiment em = e;
    em.method = method;
    double eff_sum = 0.0, rej_sum = 0.0;
    std::vector<double> masses;
    double ms_total = 0.0;
    std::string error;
    for (std::size_t s = 0; s < seed_count && error.empty(); ++s) {
      em.seed = e.seed + s;
      try {
        const auto t0 = std::chrono::steady_clock::now();
        const SimulationResult res = run_method(em, p);
        const auto t1 = std::chrono::steady_clock::now();
        ms_total += std::chrono::duration<double, std::milli>(t1 - t0).count();
        eff_sum += static_cast<double>(res.stats.m_accepted);
        rej_sum += res.stats.count_rejection;
        double mass = 0.0;
        for (const auto& pt : res.points) mass += pt.score;
        masses.push_back(mass / static_cast<double>(res.stats.m_total));
      } catch (const std::exception& ex) {
        error = ex.what();
      }
    }
    if (!error.empty()) {
      std::printf("%-14s %14s (%s)\n", method.c_str(), "n/a", error.c_str());
      continue;
    }
    const double k = static_cast<double>(seed_count);
    double mean = 0.0;
    for (double v : masses) mean += v;
    mean /= k;
    double var = 0.0;
    for (double v : masses) var += (v - mean) * (v - mean);
    const double se = seed_count > 1 ? std::sqrt(var / (k - 1.0) / k) : 0.0;
    std::printf("%-14s %14.1f %14.6e %14.6e %12.6f %12.3f\n", method.c_str(), eff_sum / k, mean,
                se, rej_sum / k, ms_total);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tailsim: simulate the far tail of a monotone target of bounded variables"};
  app.require_subcommand(1);

  Experiment e;
  std::string out_path;
  std::string config_path;
  double tol = 1.0;

  auto add_experiment_flags = [&](CLI::App* cmd, bool with_method) {
    cmd->add_option("--target", e.target, "sum-uniform | product-uniform | reliability");
    cmd->add_option("--n", e.n, "number of basic variables");
    cmd->add_option("--alpha", e.alpha, "reliability target scale");
    cmd->add_option("--beta", e.beta, "reliability variable lower bound");
    cmd->add_option("--tail", e.tail, "left | right");
    cmd->add_option("--epsilon", e.epsilon, "tail depth from the range endpoint");
    cmd->add_option("--samples", e.samples, "number of draws m");
    cmd->add_option("--seed", e.seed, "root seed of the splitmix64 stream");
    if (with_method) {
      cmd->add_option("--method", e.method, "no-rejection | equal-scores | reduced | mc");
      cmd->add_option("--region", e.region, "tangent | secant | min-corner (reduced only)");
      cmd->add_option("--resolution", e.resolution, "quadrature intervals per stage table");
    }
    cmd->add_option("--jobs", e.jobs, "worker threads (output independent of this)");
  };

  CLI::App* run = app.add_subcommand("run", "simulate one configuration, emit z,cdf,weight CSV");
  add_experiment_flags(run, true);
  run->add_option("--out", out_path, "CSV output path");

  CLI::App* compare =
      app.add_subcommand("compare", "overlay the exact conditional tail CDF, emit CSV and "
                                    "sup_distance; exit 3 when above --tol");
  add_experiment_flags(compare, true);
  compare->add_option("--out", out_path, "CSV output path");
  compare->add_option("--tol", tol, "sup distance tolerance");

  CLI::App* report =
      app.add_subcommand("report", "method comparison table over several seeds");
  add_experiment_flags(report, false);
  report->add_option("--config", config_path, "key=value config file (flags override)");
  report->add_option("--region", e.region, "region for the reduced method");
  report->add_option("--resolution", e.resolution, "quadrature intervals per stage table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    if (err.get_exit_code() == 0) return app.exit(err);
    app.exit(err);
    return 2;
  }

  try {
    if (run->parsed()) return cmd_run(e, out_path);
    if (compare->parsed()) return cmd_compare(e, out_path, tol);
    if (report->parsed()) {
      std::vector<std::string> given;
      for (const auto* opt : report->get_options())
        if (opt->count() > 0 && opt->get_name().size() > 2)
          given.push_back(opt->get_name().substr(2));
      return cmd_report(config_path, e, given);
    }
  } catch (const tailsim::ConfigError& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 2;
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 1;
  }
  return 2;
}
