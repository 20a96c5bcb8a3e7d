#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "mrof/errors.hpp"
#include "mrof/geometry.hpp"
#include "mrof/oracle.hpp"
#include "mrof/reportio.hpp"
#include "mrof/verify.hpp"

namespace {

using namespace mrof;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << text;
}

std::string read_text(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path + "'");
  std::string out((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return out;
}

int resolve_threads(int threads_flag) {
  if (threads_flag > 0) return threads_flag;
  if (const char* env = std::getenv("MROF_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return t;
  }
  return 1;
}

struct DenoiseOptions {
  std::string manifold, grid, input, schedule = "default", out;
  std::string report_path, trace_path;
  double lambda = 1.0, sigma = -1.0, eps = -1.0, delta = -1.0;
  std::uint64_t seed = 0;
  int threads = 0;
};

int run_denoise(const DenoiseOptions& opt) {
  FieldFile in = read_field(opt.input);
  if (!opt.manifold.empty() && Manifold::parse(opt.manifold).spec() != in.manifold.spec())
    throw ParseError("--manifold disagrees with the input file");
  if (!opt.grid.empty() && Grid::parse(opt.grid).spec() != in.grid.spec())
    throw ParseError("--grid disagrees with the input file");

  std::vector<ContinuationStage> schedule;
  if (opt.eps > 0) {
    schedule.push_back({opt.eps, std::max(opt.sigma, 0.0), std::max(opt.delta, 0.0)});
  } else if (opt.schedule == "default") {
    schedule = default_schedule(in.grid);
  } else if (!opt.schedule.empty() && opt.schedule.front() == '[') {
    schedule = parse_schedule_json(opt.schedule);
  } else {
    schedule = parse_schedule_json(read_text(opt.schedule));
  }

  SolveConfig cfg;
  cfg.seed = opt.seed;
  cfg.max_iter = 20000;
  cfg.grad_tol = 1e-8;
  (void)resolve_threads(opt.threads);  // assembly is sequential and thread-count invariant

  const ContinuationResult res =
      continuation(in.manifold, in.grid, in.field, opt.lambda, schedule, cfg);
  write_field(opt.out, in.manifold, in.grid, res.u);
  if (!opt.report_path.empty()) write_text(opt.report_path, continuation_report_to_json(res));
  if (!opt.trace_path.empty()) write_text(opt.trace_path, energy_trace_csv(res.stages));
  std::printf("denoise: %s stages=%zu iterations=%d energy=%.17g out=%s\n",
              in.manifold.spec().c_str(), res.stages.size(),
              res.stages.back().iterations, res.stages.back().energy_trace.back().total,
              opt.out.c_str());
  return 0;
}

struct VerifyOptions {
  std::string study, manifold = "hyperbolic:2", grid = "circle:16", out, csv;
  std::string rho = "sphere_patch", family;
  int trials = 100, samples = 10000, runs = 8;
  double eps = 0.05, sigma = 0.25, lambda = 4.0, R = -1.0;
  std::vector<int> sizes;
  std::uint64_t seed = 1;
  int threads = 0;
};

int run_verify(const VerifyOptions& opt) {
  (void)resolve_threads(opt.threads);
  const Manifold m = Manifold::parse(opt.manifold);
  StudyReport report;
  if (opt.study == "convexity") {
    report = convexity_study(m, Grid::parse(opt.grid), opt.trials, opt.seed);
  } else if (opt.study == "retraction") {
    const Grid grid = Grid::parse(opt.grid);
    const double R = opt.R > 0 ? opt.R
                               : (std::isfinite(m.convexity_radius())
                                      ? 0.4 * m.convexity_radius()
                                      : 0.8);
    report = retraction_monotonicity(m, grid, opt.trials, R, opt.seed);
  } else if (opt.study == "s2-search") {
    report = counterexample_search_s2(m, Grid::parse(opt.grid), opt.trials, opt.seed);
  } else if (opt.study == "lipschitz") {
    std::vector<int> sizes = opt.sizes;
    if (sizes.empty()) sizes = {32, 64, 128, 256, 512};
    const std::string family =
        !opt.family.empty() ? opt.family
                            : (m.kind() == ManifoldKind::euclidean ? "sawtooth"
                                                                   : "geodesic_zigzag");
    SolveConfig cfg;
    cfg.max_iter = 20000;
    cfg.grad_tol = 1e-7;
    report = lipschitz_scaling_study(m, family, sizes, opt.lambda, cfg);
  } else if (opt.study == "hypotheses") {
    report = hypothesis_study(opt.rho, opt.samples, opt.eps, opt.sigma, opt.seed);
  } else if (opt.study == "range") {
    report = range_invariance_study(m, Grid::parse(opt.grid), opt.runs, opt.seed);
  } else {
    throw ParseError("unknown study '" + opt.study +
                     "' (convexity|retraction|s2-search|lipschitz|hypotheses|range)");
  }
  if (!opt.out.empty()) write_text(opt.out, report.to_json());
  if (!opt.csv.empty()) write_text(opt.csv, report.to_csv());
  std::printf("study %s: %s (worst margin %.3e over %zu cases)\n", report.study.c_str(),
              report.pass ? "PASS" : "FAIL", report.worst_margin(), report.margins.size());
  return report.pass ? 0 : 1;
}

struct OracleCompareOptions {
  std::string grid = "interval:64", out;
  double lambda = 8.0;
  int signals = 20;
  std::uint64_t seed = 1;
  int threads = 0;
};

int run_oracle_compare(const OracleCompareOptions& opt) {
  (void)resolve_threads(opt.threads);
  const Grid grid = Grid::parse(opt.grid);
  if (grid.kind() != GridKind::interval)
    throw ParseError("oracle-compare runs on interval grids");
  const Manifold m = Manifold::euclidean(1);
  const int n = grid.num_nodes();

  Rng rng(opt.seed);
  SolveConfig cfg;
  cfg.max_iter = 60000;
  cfg.grad_tol = 1e-10;

  // eps-only continuation: the taut string solves the sigma = 0 problem.
  std::vector<ContinuationStage> schedule = default_schedule(grid, /*tie_sigma=*/false,
                                                             /*mollify_first=*/false);

  double max_gap = 0;
  for (int s = 0; s < opt.signals; ++s) {
    // Random Lipschitz signal: piecewise-linear with a handful of kinks.
    const double lip = 0.5 + 3.5 * rng.uniform();
    std::vector<double> fs(static_cast<std::size_t>(n));
    double value = rng.uniform(-0.5, 0.5);
    double slope = lip * rng.uniform(-1.0, 1.0);
    for (int i = 0; i < n; ++i) {
      fs[static_cast<std::size_t>(i)] = value;
      if (rng.uniform() < 0.08) slope = lip * rng.uniform(-1.0, 1.0);
      value += slope * grid.spacing();
    }
    Field f;
    f.values.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      Point p{Vec(1)};
      p.x[0] = fs[static_cast<std::size_t>(i)];
      f[i] = p;
    }
    const ContinuationResult res = continuation(m, grid, f, opt.lambda, schedule, cfg);
    const TautStringResult oracle = taut_string_1d(fs, opt.lambda, grid.spacing());
    double gap = 0;
    for (int i = 0; i < n; ++i)
      gap = std::max(gap, std::abs(res.u[i].x[0] - oracle.values[static_cast<std::size_t>(i)]));
    max_gap = std::max(max_gap, gap);
  }

  if (!opt.out.empty()) {
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "{\n  \"max_gap\": %.17g,\n  \"signals\": %d,\n  \"pass\": %s\n}\n", max_gap,
                  opt.signals, max_gap <= 1e-3 ? "true" : "false");
    write_text(opt.out, buf);
  }
  std::printf("oracle-compare: max-norm gap %.3e over %d signals (%s)\n", max_gap, opt.signals,
              max_gap <= 1e-3 ? "PASS" : "FAIL");
  return max_gap <= 1e-3 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Manifold-constrained ROF denoising and verification studies"};
  app.require_subcommand(1);

  DenoiseOptions d;
  CLI::App* denoise = app.add_subcommand("denoise", "Minimize the denoising energy by continuation");
  denoise->add_option("--manifold", d.manifold, "Target manifold spec (must match the input file)");
  denoise->add_option("--grid", d.grid, "Grid spec (must match the input file)");
  denoise->add_option("--input", d.input, "Input field JSON")->required();
  denoise->add_option("--out", d.out, "Output field JSON")->required();
  denoise->add_option("--lambda", d.lambda, "Fidelity weight")->required();
  denoise->add_option("--sigma", d.sigma, "Dirichlet weight (single-stage mode)");
  denoise->add_option("--eps", d.eps, "TV regularization (single-stage mode)");
  denoise->add_option("--delta", d.delta, "Mollification radius (single-stage mode)");
  denoise->add_option("--schedule", d.schedule, "'default', a JSON file, or inline JSON");
  denoise->add_option("--report", d.report_path, "Write the solve report JSON here");
  denoise->add_option("--trace", d.trace_path, "Write the energy trace CSV here");
  denoise->add_option("--seed", d.seed, "Seed");
  denoise->add_option("--threads", d.threads, "Thread count (default 1; MROF_THREADS fallback)");

  VerifyOptions v;
  CLI::App* verify = app.add_subcommand("verify", "Run a named verification study");
  verify->add_option("study", v.study, "convexity|retraction|s2-search|lipschitz|hypotheses|range")
      ->required();
  verify->add_option("--manifold", v.manifold, "Target manifold spec");
  verify->add_option("--grid", v.grid, "Grid spec");
  verify->add_option("--trials", v.trials, "Trial count");
  verify->add_option("--samples", v.samples, "Sample count (hypotheses)");
  verify->add_option("--runs", v.runs, "Run count (range)");
  verify->add_option("--eps", v.eps, "eps (hypotheses)");
  verify->add_option("--sigma", v.sigma, "sigma (hypotheses)");
  verify->add_option("--lambda", v.lambda, "lambda (lipschitz)");
  verify->add_option("--rho", v.rho, "Conformal preset (hypotheses)");
  verify->add_option("--family", v.family, "Lipschitz family (lipschitz)");
  verify->add_option("--sizes", v.sizes, "Grid sizes (lipschitz)");
  verify->add_option("--R", v.R, "Ball radius (retraction)");
  verify->add_option("--seed", v.seed, "Seed");
  verify->add_option("--out", v.out, "Write the study report JSON here");
  verify->add_option("--csv", v.csv, "Write the margin table CSV here");
  verify->add_option("--threads", v.threads, "Thread count");

  OracleCompareOptions o;
  CLI::App* oracle = app.add_subcommand("oracle-compare", "Solver vs taut string on scalar signals");
  oracle->add_option("--grid", o.grid, "Interval grid spec");
  oracle->add_option("--lambda", o.lambda, "Fidelity weight");
  oracle->add_option("--signals", o.signals, "Number of random signals");
  oracle->add_option("--seed", o.seed, "Seed");
  oracle->add_option("--out", o.out, "Write the gap report JSON here");
  oracle->add_option("--threads", o.threads, "Thread count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (denoise->parsed()) return run_denoise(d);
    if (verify->parsed()) return run_verify(v);
    if (oracle->parsed()) return run_oracle_compare(o);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
