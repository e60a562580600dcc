#include "inexact/harness/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>

#include "inexact/barycenter.hpp"
#include "inexact/clustering.hpp"
#include "inexact/errors.hpp"
#include "inexact/harness/bench.hpp"
#include "inexact/harness/generators.hpp"
#include "inexact/harness/io.hpp"
#include "inexact/prox_sinkhorn.hpp"

namespace inexact::harness {

namespace fs = std::filesystem;
using detail::fail;
using detail::require;

namespace {

GridMetric parse_metric(const std::string& s) {
  if (s == "euclid") return GridMetric::kEuclidean;
  if (s == "sqeuclid") return GridMetric::kSquaredEuclidean;
  fail("unknown metric '" + s + "'");
}

// ---- ot -------------------------------------------------------------------

struct OtArgs {
  std::string cost, p, q;
  std::vector<std::string> images;
  std::string metric = "euclid";
  double zero_floor = 1e-3;
  double epsilon = 0.1;
  std::optional<double> L, gamma, inner_accuracy;
  std::optional<std::size_t> outer_iters;
  double inner_constant = 1.0;
  bool adaptive_L = false;
  double blowup = 10.0;
  bool floor_plans = false;
  std::string method = "prox-sinkhorn";
  std::string out;
  std::uint64_t seed = 0;
};

void add_ot(CLI::App& app, OtArgs& a) {
  auto* cost = app.add_option("--cost", a.cost, "cost matrix CSV");
  auto* images = app.add_option("--images", a.images, "two image CSV grids")->expected(2);
  cost->excludes(images);
  app.add_option("--p", a.p, "source marginal CSV")->needs(cost);
  app.add_option("--q", a.q, "target marginal CSV")->needs(cost);
  app.add_option("--metric", a.metric, "pixel metric: euclid|sqeuclid");
  app.add_option("--zero-floor", a.zero_floor, "replacement for zero intensities");
  app.add_option("--epsilon", a.epsilon, "target accuracy");
  app.add_option("--L", a.L, "proximal weight (default ||C||_inf)");
  app.add_flag("--adaptive-L", a.adaptive_L, "halve L until inner cost blows up");
  app.add_option("--blowup", a.blowup, "adaptive-L blowup factor");
  app.add_option("--gamma", a.gamma, "entropic regularization (sinkhorn)");
  app.add_option("--outer-iters", a.outer_iters, "outer iterations (default auto)");
  app.add_option("--inner-accuracy", a.inner_accuracy, "inner accuracy (default auto)");
  app.add_option("--inner-constant", a.inner_constant, "constant in the auto inner accuracy");
  app.add_flag("--floor-plans", a.floor_plans, "floor plan entries between outer steps");
  app.add_option("--method", a.method, "sinkhorn|prox-sinkhorn")
      ->check(CLI::IsMember({"sinkhorn", "prox-sinkhorn"}));
  app.add_option("--out", a.out, "output directory")->required();
  app.add_option("--seed", a.seed, "recorded seed");
}

int run_ot(const OtArgs& a, std::ostream& out) {
  Matrix C;
  std::optional<ProbabilityVector> p, q;
  if (!a.images.empty()) {
    const Matrix A = read_csv_matrix(a.images[0]);
    const Matrix B = read_csv_matrix(a.images[1]);
    require(A.rows() == B.rows() && A.cols() == B.cols(), "images differ in shape");
    C = grid_cost(A.rows(), A.cols(), parse_metric(a.metric));
    p = image_marginal(A, a.zero_floor);
    q = image_marginal(B, a.zero_floor);
  } else {
    require(!a.cost.empty(), "need --cost or --images");
    require(!a.p.empty() && !a.q.empty(), "--cost needs --p and --q");
    C = read_csv_matrix(a.cost);
    p = ProbabilityVector::from_intensities(read_csv_vector(a.p), a.zero_floor);
    q = ProbabilityVector::from_intensities(read_csv_vector(a.q), a.zero_floor);
  }
  const OTInstance inst(C, *p, *q);
  const fs::path dir(a.out);
  nlohmann::json result;
  TransportPlan plan;
  RunTrace trace;
  if (a.method == "sinkhorn") {
    require(a.gamma.has_value(), "sinkhorn needs --gamma");
    SinkhornOptions opts;
    opts.gamma = *a.gamma;
    opts.accuracy = a.inner_accuracy.value_or(a.epsilon);
    SinkhornResult r = sinkhorn(inst, opts);
    plan = std::move(r.plan);
    trace = std::move(r.trace);
    result["iterations"] = r.iterations;
    result["outer_iters"] = 1;
    result["gamma"] = *a.gamma;
    result["reg_objective"] = reg_objective(plan.matrix, C, *a.gamma);
  } else {
    ProxConfig cfg;
    cfg.L = a.L.value_or(std::max(C.cwiseAbs().maxCoeff(), 1e-12));
    cfg.epsilon = a.epsilon;
    cfg.inner_accuracy = a.inner_accuracy;
    cfg.outer_iters = a.outer_iters;
    cfg.inner_constant = a.inner_constant;
    cfg.adaptive_L = a.adaptive_L;
    cfg.blowup = a.blowup;
    cfg.floor_plans = a.floor_plans;
    ProxResult r = prox_sinkhorn(inst, cfg);
    plan = std::move(r.plan);
    trace = std::move(r.trace);
    result["outer_iters"] = r.outer_iterations;
    result["total_inner_iterations"] = r.total_inner_iterations;
    result["L"] = r.L;
    result["inner_accuracy"] = r.inner_accuracy;
    result["certified_precision"] = r.certified_precision;
  }
  result["method"] = a.method;
  result["transport_cost"] = frobenius(C, plan.matrix);
  result["row_residual"] = plan.row_residual;
  result["col_residual"] = plan.col_residual;
  result["n"] = C.rows();
  result["seed"] = a.seed;
  write_csv(dir / "plan.csv", plan.matrix);
  write_json(dir / "result.json", result);
  write_trace(dir, "trace", trace, a.seed);
  out << "transport_cost " << format_double(result["transport_cost"].get<double>()) << "\n";
  return kExitOk;
}

// ---- barycenter -----------------------------------------------------------

struct BaryArgs {
  std::string measures;
  std::optional<std::size_t> gaussians;
  std::uint64_t seed = 0;
  std::string weights = "uniform";
  std::string method = "prox-ibp";
  std::string metric = "euclid";
  double zero_floor = 1e-3;
  double gaussian_floor = 1e-10;
  std::optional<double> L, gamma, inner_accuracy;
  std::optional<std::size_t> outer_iters;
  double inner_constant = 1.0;
  double epsilon = 0.1;
  std::string out;
};

void add_bary(CLI::App& app, BaryArgs& a) {
  auto* dir = app.add_option("--measures", a.measures, "directory of image CSV grids");
  auto* gs = app.add_option("--gaussians", a.gaussians, "generate m truncated Gaussians");
  dir->excludes(gs);
  app.add_option("--seed", a.seed, "generator seed");
  app.add_option("--weights", a.weights, "weights CSV or 'uniform'");
  app.add_option("--method", a.method, "ibp|prox-ibp")->check(CLI::IsMember({"ibp", "prox-ibp"}));
  app.add_option("--metric", a.metric, "pixel metric for image measures: euclid|sqeuclid");
  app.add_option("--zero-floor", a.zero_floor, "replacement for zero intensities");
  app.add_option("--gaussian-floor", a.gaussian_floor, "floor for generated densities");
  app.add_option("--L", a.L, "proximal weight (prox-ibp)");
  app.add_option("--gamma", a.gamma, "entropic regularization (ibp)");
  app.add_option("--outer-iters", a.outer_iters, "outer iterations (default auto)");
  app.add_option("--inner-accuracy", a.inner_accuracy, "inner accuracy (default auto)");
  app.add_option("--inner-constant", a.inner_constant, "constant in the auto inner accuracy");
  app.add_option("--epsilon", a.epsilon, "target accuracy");
  app.add_option("--out", a.out, "output directory")->required();
}

int run_bary(const BaryArgs& a, std::ostream& out) {
  std::vector<ProbabilityVector> measures;
  Matrix C;
  if (a.gaussians) {
    GaussianFamily fam = gaussian_family(*a.gaussians, a.seed, a.gaussian_floor);
    measures = std::move(fam.measures);
    C = line_cost(fam.support);
  } else {
    require(!a.measures.empty(), "need --measures or --gaussians");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(a.measures)) {
      if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    require(!files.empty(), "no .csv files in " + a.measures);
    Eigen::Index rows = 0, cols = 0;
    for (const auto& f : files) {
      const Matrix img = read_csv_matrix(f);
      if (measures.empty()) {
        rows = img.rows();
        cols = img.cols();
      }
      require(img.rows() == rows && img.cols() == cols, "images differ in shape: " + f.string());
      measures.push_back(image_marginal(img, a.zero_floor));
    }
    C = grid_cost(rows, cols, parse_metric(a.metric));
  }
  const std::size_t m = measures.size();
  Vector w;
  if (a.weights == "uniform") {
    w = Vector::Constant(static_cast<Eigen::Index>(m), 1.0 / static_cast<double>(m));
  } else {
    w = read_csv_vector(a.weights);
    require(w.size() == static_cast<Eigen::Index>(m), "weights count differs from measures");
    require(w.minCoeff() >= 0.0 && w.sum() > 0.0, "weights must be nonnegative");
    w /= w.sum();
  }
  const BarycenterInstance inst(measures, std::vector<Matrix>(m, C), w);
  const fs::path dir(a.out);
  nlohmann::json result;
  Vector q;
  RunTrace trace;
  double objective = 0.0;
  if (a.method == "ibp") {
    require(a.gamma.has_value(), "ibp needs --gamma");
    IBPOptions opts;
    opts.gamma = *a.gamma;
    opts.accuracy = a.inner_accuracy.value_or(a.epsilon);
    IBPResult r = ibp(inst, opts);
    q = r.q;
    objective = barycenter_objective(r.stack, inst);
    trace = std::move(r.trace);
    result["iterations"] = r.iterations;
    result["gamma"] = *a.gamma;
  } else {
    ProxConfig cfg;
    cfg.L = a.L.value_or(std::max(inst.max_cost_norm(), 1e-12));
    cfg.epsilon = a.epsilon;
    cfg.inner_accuracy = a.inner_accuracy;
    cfg.outer_iters = a.outer_iters;
    cfg.inner_constant = a.inner_constant;
    ProxIBPResult r = prox_ibp(inst, cfg);
    q = r.q;
    objective = r.objective;
    trace = std::move(r.trace);
    result["outer_iters"] = r.outer_iterations;
    result["total_inner_iterations"] = r.total_inner_iterations;
    result["L"] = r.L;
    result["inner_accuracy"] = r.inner_accuracy;
  }
  result["method"] = a.method;
  result["objective"] = objective;
  result["m"] = inst.m();
  result["n"] = inst.n();
  result["seed"] = a.seed;
  write_csv_vector(dir / "barycenter.csv", q);
  write_json(dir / "result.json", result);
  write_trace(dir, "objective_log", trace, a.seed);
  out << "objective " << format_double(objective) << "\n";
  return kExitOk;
}

// ---- cluster --------------------------------------------------------------

struct ClusterArgs {
  std::string g = "opinion";
  std::string opinions, quad_A, quad_b;
  std::optional<double> Lg;
  Eigen::Index n = 0, m = 0;
  double mu1 = 1.0, mu2 = 1.0;
  std::optional<double> p_box;
  std::string method = "adaptive";
  std::optional<double> L;
  std::size_t iters = 100;
  std::string out;
  std::uint64_t seed = 0;
};

void add_cluster(CLI::App& app, ClusterArgs& a) {
  app.add_option("--g", a.g, "coupling term: zero|opinion|quadratic")
      ->check(CLI::IsMember({"zero", "opinion", "quadratic"}));
  app.add_option("--opinions", a.opinions, "voter-opinion CSV (rows = voters)");
  app.add_option("--quad-A", a.quad_A, "quadratic term matrix CSV");
  app.add_option("--quad-b", a.quad_b, "quadratic term vector CSV");
  app.add_option("--Lg", a.Lg, "declared L_g for --g zero");
  app.add_option("--n", a.n, "simplex dimension (zero / quadratic)");
  app.add_option("--m", a.m, "orthant dimension (zero / quadratic)");
  app.add_option("--mu1", a.mu1, "entropy weight");
  app.add_option("--mu2", a.mu2, "quadratic weight");
  app.add_option("--p-box", a.p_box, "upper bound on p coordinates");
  app.add_option("--method", a.method, "fixed|adaptive|adaptive-sc")
      ->check(CLI::IsMember({"fixed", "adaptive", "adaptive-sc"}));
  app.add_option("--L", a.L, "fixed step constant or adaptive L0");
  app.add_option("--iters", a.iters, "iterations");
  app.add_option("--out", a.out, "output directory")->required();
  app.add_option("--seed", a.seed, "recorded seed");
}

int run_cluster(const ClusterArgs& a, std::ostream& out) {
  ClusteringProblem prob;
  if (a.g == "opinion") {
    require(!a.opinions.empty(), "--g opinion needs --opinions");
    const Matrix O = read_csv_matrix(a.opinions);
    prob.n = O.rows();
    prob.m = O.cols();
    prob.g = make_opinion_term(O);
  } else if (a.g == "quadratic") {
    require(!a.quad_A.empty() && !a.quad_b.empty(), "--g quadratic needs --quad-A and --quad-b");
    require(a.n > 0 && a.m > 0, "--g quadratic needs --n and --m");
    prob.n = a.n;
    prob.m = a.m;
    prob.g = make_quadratic_term(read_csv_matrix(a.quad_A), read_csv_vector(a.quad_b));
  } else {
    require(a.n > 0 && a.m > 0, "--g zero needs --n and --m");
    prob.n = a.n;
    prob.m = a.m;
    prob.g = make_zero_term(a.Lg.value_or(0.0));
  }
  prob.mu1 = a.mu1;
  prob.mu2 = a.mu2;
  prob.p_box = a.p_box;
  prob.validate();

  ClusteringMethod method = ClusteringMethod::kAdaptive;
  GMConfig cfg;
  cfg.max_iters = a.iters;
  if (a.method == "fixed") {
    method = ClusteringMethod::kFixed;
    cfg.L0 = a.L.value_or(2.0 * prob.g.lipschitz);
    require(cfg.L0 > 0.0, "fixed method needs --L when L_g = 0");
  } else {
    cfg.L0 = a.L.value_or(1.0);
    if (a.method == "adaptive-sc") {
      method = ClusteringMethod::kAdaptiveStronglyConvex;
      const double mu = std::min(prob.mu1, prob.mu2) - prob.g.lipschitz;
      require(mu > 0.0, "adaptive-sc needs min(mu1, mu2) > L_g");
      cfg.L0 = a.L.value_or(2.0 * mu);
    }
  }
  const ProductPoint x0(ProbabilityVector::uniform(prob.n), Vector::Zero(prob.m));
  GMResult r = solve_clustering(prob, x0, cfg, method);
  const ProductPoint x = ProductPoint::from_flat(r.last_iterate, prob.n);
  const fs::path dir(a.out);
  write_csv_vector(dir / "z.csv", x.z.vector());
  write_csv_vector(dir / "p.csv", x.p);
  write_trace(dir, "trace", r.trace, a.seed);
  nlohmann::json result = {{"method", a.method},
                           {"g", prob.g.name},
                           {"potential", potential(prob, x)},
                           {"iterations", r.lipschitz.size()},
                           {"total_attempts", r.total_attempts},
                           {"z", std::vector<double>(x.z.vector().data(),
                                                     x.z.vector().data() + x.z.size())},
                           {"p", std::vector<double>(x.p.data(), x.p.data() + x.p.size())},
                           {"trace", (dir / "trace.txt").string()},
                           {"seed", a.seed}};
  write_json(dir / "result.json", result);
  out << "potential " << format_double(result["potential"].get<double>()) << "\n";
  return kExitOk;
}

// ---- bench ----------------------------------------------------------------

struct BenchArgs {
  int example = 1;
  std::string method = "adaptive-sc";
  std::optional<std::size_t> iters;
  std::size_t dim = 100;
  bool all = false;
  std::string out;
};

void add_bench(CLI::App& app, BenchArgs& a) {
  app.add_option("--example", a.example, "1 or 2")->check(CLI::IsMember({1, 2}));
  app.add_option("--method", a.method, "fixed|adaptive|adaptive-sc")
      ->check(CLI::IsMember({"fixed", "adaptive", "adaptive-sc"}));
  app.add_option("--iters", a.iters, "last table row (default from the example)");
  app.add_option("--dim", a.dim, "problem dimension");
  app.add_flag("--all", a.all, "every example and method, on INEXACT_WORKERS slots");
  app.add_option("--out", a.out, "output directory")->required();
}

std::vector<std::size_t> rows_up_to(int example, std::optional<std::size_t> iters) {
  std::vector<std::size_t> ks = default_rows(example);
  if (!iters) return ks;
  std::vector<std::size_t> kept;
  for (std::size_t k : ks) {
    if (k <= *iters) kept.push_back(k);
  }
  if (kept.empty() || kept.back() != *iters) kept.push_back(*iters);
  return kept;
}

int run_bench_cmd(const BenchArgs& a, std::ostream& out) {
  std::vector<BenchSpec> specs;
  if (a.all) {
    for (int ex : {1, 2}) {
      for (auto m : {BenchMethod::kFixed, BenchMethod::kAdaptive,
                     BenchMethod::kAdaptiveStronglyConvex}) {
        specs.push_back({ex, m, a.dim, rows_up_to(ex, a.iters)});
      }
    }
  } else {
    specs.push_back({a.example, parse_bench_method(a.method), a.dim, rows_up_to(a.example, a.iters)});
  }
  const auto tables = run_bench_batch(specs, worker_slots());
  const fs::path dir(a.out);
  nlohmann::json summary = nlohmann::json::array();
  for (const auto& t : tables) {
    const std::string name =
        "example" + std::to_string(t.spec.example) + "_" + bench_method_name(t.spec.method);
    write_text_atomic(dir / (name + ".csv"), bench_csv(t));
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : t.rows) rows.push_back({{"k", r.k}, {"estimate", r.estimate}});
    summary.push_back({{"example", t.spec.example},
                       {"method", bench_method_name(t.spec.method)},
                       {"rows", rows}});
    out << name << "\n  k  estimate\n";
    for (const auto& r : t.rows) out << "  " << r.k << "  " << format_double(r.estimate) << "\n";
  }
  write_json(dir / "bench.json", summary);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Inexact-model gradient methods, Proximal Sinkhorn and Proximal IBP"};
  app.require_subcommand(1);
  OtArgs ot;
  BaryArgs bary;
  ClusterArgs cluster;
  BenchArgs bench;
  add_ot(*app.add_subcommand("ot", "optimal transport distance"), ot);
  add_bary(*app.add_subcommand("barycenter", "Wasserstein barycenter"), bary);
  add_cluster(*app.add_subcommand("cluster", "electoral clustering model"), cluster);
  add_bench(*app.add_subcommand("bench", "strongly convex bound tables"), bench);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadInput;
  }

  try {
    if (app.got_subcommand("ot")) return run_ot(ot, out);
    if (app.got_subcommand("barycenter")) return run_bary(bary, out);
    if (app.got_subcommand("cluster")) return run_cluster(cluster, out);
    return run_bench_cmd(bench, out);
  } catch (const ConvergenceError& e) {
    err << "no convergence: " << e.what() << "\n";
    return kExitNoConvergence;
  } catch (const InvalidInput& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const fs::filesystem_error& e) {
    err << "file error: " << e.what() << "\n";
    return kExitBadInput;
  }
}

}  // namespace inexact::harness
