#include "dfgt/cli.hpp"

#include "dfgt/cv.hpp"
#include "dfgt/datagen.hpp"
#include "dfgt/dataset.hpp"
#include "dfgt/engine.hpp"
#include "dfgt/gridfft.hpp"
#include "dfgt/kdtree.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace dfgt {

namespace {

class StopWatch {
public:
  StopWatch()
    : start_(std::chrono::steady_clock::now())
  {
  }
  double seconds() const
  {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
      .count();
  }

private:
  std::chrono::steady_clock::time_point start_;
};

void write_points(const std::string& path, const PointSet& points)
{
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write '" + path + "'");
  }
  char buf[64];
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto row = points.row(i);
    for (std::size_t d = 0; d < points.dim(); ++d) {
      std::snprintf(buf, sizeof(buf), "%.17g", row[d]);
      out << buf << (d + 1 < points.dim() ? "," : "\n");
    }
  }
}

std::string format_double(double v, const char* fmt)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

struct CommonOptions {
  double epsilon = 0.01;
  int leaf_threshold = 20;
  int p_max = 0; // 0 = per-dimension default
  std::string cost_model = "exponential";
  std::size_t grid_size = 256;
  std::size_t grid_cell_cap = std::size_t{ 1 } << 22;

  EngineConfig engine_config() const
  {
    EngineConfig config;
    config.epsilon = epsilon;
    config.leaf_threshold = leaf_threshold;
    if (p_max > 0) {
      config.p_max = p_max;
    }
    if (cost_model == "term-count") {
      config.cost_model = CostModel::term_count;
    } else if (cost_model != "exponential") {
      throw CLI::ValidationError("--cost-model",
                                 "must be exponential or term-count");
    }
    config.grid_size = grid_size;
    config.grid_cell_cap = grid_cell_cap;
    return config;
  }
};

void add_common_options(CLI::App& cmd, CommonOptions& common)
{
  cmd.add_option("--epsilon", common.epsilon, "Relative error tolerance")
    ->check(CLI::NonNegativeNumber);
  cmd.add_option("--leaf-threshold", common.leaf_threshold, "kd-tree leaf size")
    ->check(CLI::PositiveNumber);
  cmd.add_option("--pmax", common.p_max,
                 "Truncation order limit (default: per-dimension table)");
  cmd.add_option("--cost-model", common.cost_model,
                 "Method-selection cost model: exponential | term-count");
  cmd.add_option("--grid-size", common.grid_size, "gridfft nodes per dimension");
  cmd.add_option("--grid-cap", common.grid_cell_cap, "gridfft padded cell cap");
}

Algorithm algorithm_from_flag(const std::string& name)
{
  const auto parsed = parse_algorithm(name);
  if (!parsed) {
    throw CLI::ValidationError("--algorithm", "unknown algorithm '" + name + "'");
  }
  return *parsed;
}

std::vector<double> default_scales() { return { 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1e3 }; }

int cmd_gen(const std::string& out, std::size_t n, std::size_t dim,
            const std::string& dist, std::uint64_t seed)
{
  const auto kind = parse_distribution(dist);
  if (!kind) {
    std::cerr << "error: unknown distribution '" << dist << "'\n";
    return 2;
  }
  write_points(out, generate_points(*kind, n, dim, seed));
  return 0;
}

int cmd_kde(const std::string& ref_path, const std::string& query_path,
            const std::string& out, double bandwidth, const std::string& algorithm_name,
            const CommonOptions& common, bool raw_sums, bool dump)
{
  const Algorithm algorithm = algorithm_from_flag(algorithm_name);
  const PointSet refs = load_points(ref_path);
  const PointSet queries = query_path.empty() ? refs : load_points(query_path);

  if (dump) {
    dump_tree(KdTree::build(refs, common.leaf_threshold), std::cout);
  }

  auto sums = compute_sums(algorithm, queries, refs, bandwidth, common.engine_config());
  if (!raw_sums) {
    const double norm =
      static_cast<double>(refs.size()) * gaussian_normalizer(refs.dim(), bandwidth);
    for (double& s : sums) {
      s /= norm;
    }
  }
  write_values(out, sums);
  return 0;
}

int cmd_cv(const std::string& ref_path, const std::string& out,
           const std::string& score_name, std::vector<double> scales, double base_h,
           const std::string& algorithm_name, const std::string& conv_name, bool verify,
           const CommonOptions& common)
{
  const PointSet refs = load_points(ref_path);
  CvOptions options;
  options.algorithm = algorithm_from_flag(algorithm_name);
  options.engine = common.engine_config();
  options.verify_against_naive = verify;
  if (conv_name == "sqrt2") {
    options.sqrt2_convolution = true;
  } else if (conv_name != "2x") {
    std::cerr << "error: --convolution-bandwidth must be 2x or sqrt2\n";
    return 2;
  }
  const CvScore kind =
    score_name == "lkcv" ? CvScore::likelihood : CvScore::least_squares;
  if (score_name != "lkcv" && score_name != "lscv") {
    std::cerr << "error: --score must be lscv or lkcv\n";
    return 2;
  }

  if (scales.empty()) {
    scales = default_scales();
  }
  if (base_h <= 0.0) {
    base_h = pilot_bandwidth(refs);
  }
  const auto rows = bandwidth_sweep(refs, scales, base_h, kind, options);

  std::ofstream table(out);
  if (!table) {
    throw std::runtime_error("cannot write '" + out + "'");
  }
  table << "scale,h,score,seconds,max_rel_err\n";
  for (const auto& row : rows) {
    table << format_double(row.scale, "%.6g") << ',' << format_double(row.h, "%.10g")
          << ',' << format_double(row.score, "%.10g") << ','
          << format_double(row.seconds, "%.3f") << ','
          << (row.max_rel_err ? format_double(*row.max_rel_err, "%.3g") : "") << '\n';
    if (row.clamped > 0) {
      std::cerr << "warning: h=" << row.h << ": " << row.clamped
                << " leave-one-out sums clamped to the smallest positive double\n";
    }
  }
  return 0;
}

struct BenchRow {
  double scale;
  double h;
  std::string algorithm;
  double seconds = 0.0;
  std::optional<double> max_rel_err;
  std::string status = "ok";
};

//! FFT-grid refinement: start at 16 nodes per dimension and double until the
//! tolerance is met or the padded grid exceeds the cell cap (reported as
//! "inf", or "X" when even the first grid cannot be built).
BenchRow bench_gridfft(const PointSet& queries, const PointSet& refs, double h,
                       double epsilon, std::size_t grid_size, std::size_t cell_cap,
                       const std::vector<double>* exact)
{
  BenchRow row;
  row.algorithm = "gridfft";
  if (!exact) {
    // No exact sums to refine against; time the configured grid only.
    const std::vector<std::size_t> sizes(refs.dim(), grid_size);
    StopWatch watch;
    try {
      gridfft_kde(queries, refs, h, sizes, cell_cap);
      row.seconds = watch.seconds();
      row.status = "unverified";
    } catch (const GridInfeasibleError&) {
      row.status = "X";
    }
    return row;
  }
  std::size_t m = 16;
  bool first = true;
  for (;;) {
    const std::vector<std::size_t> sizes(refs.dim(), m);
    std::vector<double> sums;
    StopWatch watch;
    try {
      sums = gridfft_kde(queries, refs, h, sizes, cell_cap);
    } catch (const GridInfeasibleError&) {
      row.status = first ? "X" : "inf";
      return row;
    }
    const double seconds = watch.seconds();
    const double err = verify_relative_error(sums, *exact).max_relative_error;
    if (err <= epsilon) {
      row.seconds = seconds;
      row.max_rel_err = err;
      return row;
    }
    row.max_rel_err = err;
    first = false;
    m *= 2;
  }
}

int cmd_bench(const std::string& ref_path, const std::string& query_path,
              const std::string& out, std::vector<double> scales, double base_h,
              const std::string& algorithms_flag, std::size_t naive_cap,
              const CommonOptions& common)
{
  const PointSet refs = load_points(ref_path);
  const PointSet queries = query_path.empty() ? refs : load_points(query_path);
  if (scales.empty()) {
    scales = default_scales();
  }
  if (base_h <= 0.0) {
    base_h = pilot_bandwidth(refs);
  }

  std::vector<Algorithm> algorithms;
  {
    std::stringstream ss(algorithms_flag);
    std::string name;
    while (std::getline(ss, name, ',')) {
      algorithms.push_back(algorithm_from_flag(name));
    }
  }

  std::optional<DualTreeEngine> dfd_engine;
  std::optional<DualTreeEngine> dfgt_engine;

  std::vector<BenchRow> rows;
  for (double scale : scales) {
    const double h = scale * base_h;

    // Exact sums anchor the error column; above the cap the naive timing is
    // extrapolated from a query subsample and errors go unreported.
    std::optional<std::vector<double>> exact;
    double naive_seconds = 0.0;
    bool extrapolated = false;
    if (queries.size() <= naive_cap * naive_cap / std::max<std::size_t>(refs.size(), 1)) {
      StopWatch watch;
      exact = naive_kde(queries, refs, h);
      naive_seconds = watch.seconds();
    } else {
      extrapolated = true;
      const std::size_t sample =
        std::max<std::size_t>(1, naive_cap * naive_cap / refs.size());
      PointSet subset(sample, queries.dim());
      for (std::size_t i = 0; i < sample; ++i) {
        auto dst = subset.row(i);
        const auto src = queries.row(i);
        std::copy(src.begin(), src.end(), dst.begin());
      }
      StopWatch watch;
      naive_kde(subset, refs, h);
      naive_seconds = watch.seconds() * static_cast<double>(queries.size()) /
                      static_cast<double>(sample);
    }

    for (Algorithm algorithm : algorithms) {
      BenchRow row;
      row.scale = scale;
      row.h = h;
      row.algorithm = std::string(algorithm_name(algorithm));
      switch (algorithm) {
      case Algorithm::naive:
        row.seconds = naive_seconds;
        row.status = extrapolated ? "extrapolated" : "ok";
        if (exact) {
          row.max_rel_err = 0.0;
        }
        break;
      case Algorithm::dfd: {
        if (!dfd_engine) {
          dfd_engine.emplace(refs, DualTreeEngine::Mode::centroid,
                             common.engine_config());
        }
        StopWatch watch;
        const auto sums = dfd_engine->compute(queries, h);
        row.seconds = watch.seconds();
        if (exact) {
          row.max_rel_err = verify_relative_error(sums, *exact).max_relative_error;
        }
        break;
      }
      case Algorithm::dfgt: {
        if (!dfgt_engine) {
          dfgt_engine.emplace(refs, DualTreeEngine::Mode::series,
                              common.engine_config());
        }
        StopWatch watch;
        const auto sums = dfgt_engine->compute(queries, h);
        row.seconds = watch.seconds();
        if (exact) {
          row.max_rel_err = verify_relative_error(sums, *exact).max_relative_error;
        }
        break;
      }
      case Algorithm::gridfft: {
        row = bench_gridfft(queries, refs, h, common.epsilon, common.grid_size,
                            common.grid_cell_cap, exact ? &*exact : nullptr);
        row.scale = scale;
        row.h = h;
        break;
      }
      }
      rows.push_back(std::move(row));
    }
  }

  std::ofstream table(out);
  if (!table) {
    throw std::runtime_error("cannot write '" + out + "'");
  }
  table << "scale,h,algorithm,seconds,max_rel_err,status\n";
  for (const auto& row : rows) {
    table << format_double(row.scale, "%.6g") << ',' << format_double(row.h, "%.10g")
          << ',' << row.algorithm << ',' << format_double(row.seconds, "%.3f") << ','
          << (row.max_rel_err ? format_double(*row.max_rel_err, "%.3g") : "") << ','
          << row.status << '\n';
  }
  return 0;
}

int cmd_verify(const std::string& approx_path, const std::string& exact_path,
               double epsilon)
{
  const PointSet approx = load_points(approx_path);
  const PointSet exact = load_points(exact_path);
  if (approx.dim() != 1 || exact.dim() != 1) {
    std::cerr << "error: verify expects single-column value files\n";
    return 2;
  }
  const auto report = verify_relative_error(approx.data(), exact.data());
  std::cout << "max_rel_err=" << format_double(report.max_relative_error, "%.6g")
            << " index=" << report.worst_index << " epsilon="
            << format_double(epsilon, "%.6g") << '\n';
  return report.max_relative_error <= epsilon ? 0 : 1;
}

} // namespace

int run_cli(int argc, const char* const* argv)
{
  CLI::App app{ "Gaussian kernel summation engines with a hard relative-error "
                "guarantee" };
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic point set");
  std::string gen_out;
  std::size_t gen_n = 1000;
  std::size_t gen_dim = 2;
  std::string gen_dist = "gaussian-mixture";
  std::uint64_t gen_seed = 1;
  gen->add_option("--out", gen_out, "Output file")->required();
  gen->add_option("--n", gen_n, "Number of points")->check(CLI::PositiveNumber);
  gen->add_option("--dim", gen_dim, "Dimensionality")->check(CLI::PositiveNumber);
  gen->add_option("--dist", gen_dist, "gaussian-mixture | uniform | clustered");
  gen->add_option("--seed", gen_seed, "RNG seed");

  // kde
  auto* kde = app.add_subcommand("kde", "Compute per-query densities");
  std::string kde_ref;
  std::string kde_query;
  std::string kde_out;
  std::string kde_algorithm = "dfgt";
  double kde_bandwidth = 0.0;
  bool kde_raw = false;
  bool kde_dump = false;
  CommonOptions kde_common;
  kde->add_option("--ref", kde_ref, "Reference point file")->required();
  kde->add_option("--query", kde_query, "Query point file (default: reference)");
  kde->add_option("--out", kde_out, "Output density file")->required();
  kde->add_option("--bandwidth", kde_bandwidth, "Kernel bandwidth")
    ->required()
    ->check(CLI::PositiveNumber);
  kde->add_option("--algorithm", kde_algorithm, "naive | dfd | dfgt | gridfft");
  kde->add_flag("--raw-sums", kde_raw, "Write unnormalized kernel sums");
  kde->add_flag("--dump-tree", kde_dump, "Print the reference kd-tree");
  add_common_options(*kde, kde_common);

  // cv
  auto* cv = app.add_subcommand("cv", "Cross-validation bandwidth sweep");
  std::string cv_ref;
  std::string cv_out;
  std::string cv_score = "lscv";
  std::string cv_algorithm = "dfgt";
  std::string cv_conv = "2x";
  std::vector<double> cv_scales;
  double cv_base_h = 0.0;
  bool cv_verify = false;
  CommonOptions cv_common;
  cv->add_option("--ref", cv_ref, "Reference point file")->required();
  cv->add_option("--out", cv_out, "Output CSV table")->required();
  cv->add_option("--score", cv_score, "lscv | lkcv");
  cv->add_option("--algorithm", cv_algorithm, "naive | dfd | dfgt | gridfft");
  cv->add_option("--scales", cv_scales, "Bandwidth scale multipliers")->delimiter(',');
  cv->add_option("--base-h", cv_base_h, "Base bandwidth (default: pilot rule)");
  cv->add_option("--convolution-bandwidth", cv_conv, "2x | sqrt2");
  cv->add_flag("--verify", cv_verify, "Record achieved error vs the naive engine");
  add_common_options(*cv, cv_common);

  // bench
  auto* bench = app.add_subcommand("bench", "Timing/error table across engines");
  std::string bench_ref;
  std::string bench_query;
  std::string bench_out;
  std::string bench_algorithms = "naive,dfd,dfgt";
  std::vector<double> bench_scales;
  double bench_base_h = 0.0;
  std::size_t bench_naive_cap = 20000;
  CommonOptions bench_common;
  bench->add_option("--ref", bench_ref, "Reference point file")->required();
  bench->add_option("--query", bench_query, "Query point file (default: reference)");
  bench->add_option("--out", bench_out, "Output CSV table")->required();
  bench->add_option("--algorithms", bench_algorithms, "Comma-separated engine list");
  bench->add_option("--scales", bench_scales, "Bandwidth scale multipliers")
    ->delimiter(',');
  bench->add_option("--base-h", bench_base_h, "Base bandwidth (default: pilot rule)");
  bench->add_option("--naive-cap", bench_naive_cap,
                    "Extrapolate naive timings above this size");
  add_common_options(*bench, bench_common);

  // verify
  auto* verify = app.add_subcommand("verify", "Compare two density files");
  std::string verify_approx;
  std::string verify_exact;
  double verify_epsilon = 0.01;
  verify->add_option("--approx", verify_approx, "Approximate density file")->required();
  verify->add_option("--exact", verify_exact, "Exact density file")->required();
  verify->add_option("--epsilon", verify_epsilon, "Tolerance")
    ->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      return cmd_gen(gen_out, gen_n, gen_dim, gen_dist, gen_seed);
    }
    if (kde->parsed()) {
      return cmd_kde(kde_ref, kde_query, kde_out, kde_bandwidth, kde_algorithm,
                     kde_common, kde_raw, kde_dump);
    }
    if (cv->parsed()) {
      return cmd_cv(cv_ref, cv_out, cv_score, cv_scales, cv_base_h, cv_algorithm,
                    cv_conv, cv_verify, cv_common);
    }
    if (bench->parsed()) {
      return cmd_bench(bench_ref, bench_query, bench_out, bench_scales, bench_base_h,
                       bench_algorithms, bench_naive_cap, bench_common);
    }
    if (verify->parsed()) {
      return cmd_verify(verify_approx, verify_exact, verify_epsilon);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

} // namespace dfgt
