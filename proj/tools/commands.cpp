#include "commands.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fgs/dataset.hpp"
#include "fgs/graphop.hpp"
#include "fgs/learn.hpp"
#include "fgs/report.hpp"
#include "fgs/spectral.hpp"

namespace fgs::cli {

namespace {

/// Largest point count for which a dense reference is computed.
constexpr Eigen::Index kReferenceBudget = 23000;

class Timer {
public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

private:
  std::chrono::steady_clock::time_point start_;
};

/// Flags shared by every pipeline command.
struct CommonOpts {
  std::string in;
  std::string out;
  std::string kernel_name = "gaussian";
  double sigma = 1.0;
  double c = 1.0;
  int setup = 2;
  int bandwidth = 0;   // 0 = keep the setup preset
  int cutoff = 0;
  int smoothness = 0;
  double eps_b = -1.0; // < 0 = keep the setup preset
  std::string method = "nfft-lanczos";
  int k = 10;
  int sketch_l = 100;
  int sketch_m = 10;
  double tol = -1.0;   // < 0 = command default
  std::uint64_t seed = 1;
  int threads = 0;
  bool with_reference = false;
};

void add_io_flags(CLI::App* cmd, CommonOpts* opts, bool in_required) {
  auto* in = cmd->add_option("--in", opts->in, "input file");
  if (in_required) in->required();
  cmd->add_option("--out", opts->out, "output path")->required();
  cmd->add_option("--seed", opts->seed, "random seed");
  cmd->add_option("--threads", opts->threads,
                  "thread budget (execution is serial; 1 = deterministic "
                  "mode, same as FGS_DETERMINISTIC=1)");
}

void add_kernel_flags(CLI::App* cmd, CommonOpts* opts) {
  cmd->add_option("--kernel", opts->kernel_name,
                  "gaussian | laplacian-rbf | multiquadric | inv-multiquadric")
      ->check(CLI::IsMember({"gaussian", "laplacian-rbf", "multiquadric",
                             "inv-multiquadric"}));
  cmd->add_option("--sigma", opts->sigma, "shape parameter of the RBF kernels");
  cmd->add_option("--c", opts->c,
                  "shape parameter of the (inverse) multiquadric kernels");
}

void add_fastsum_flags(CLI::App* cmd, CommonOpts* opts) {
  cmd->add_option("--setup", opts->setup,
                  "accuracy preset: 1 (N=16,m=2), 2 (N=32,m=4), 3 (N=64,m=7)")
      ->check(CLI::Range(1, 3));
  cmd->add_option("--N", opts->bandwidth, "override: kernel model bandwidth");
  cmd->add_option("--m", opts->cutoff, "override: window cutoff");
  cmd->add_option("--p", opts->smoothness, "override: boundary blend order");
  cmd->add_option("--eps-b", opts->eps_b, "override: boundary blend width");
}

void add_method_flags(CLI::App* cmd, CommonOpts* opts,
                      const std::string& default_method) {
  opts->method = default_method;
  cmd->add_option("--method", opts->method,
                  "nfft-lanczos | nystrom | nystrom-gauss-nfft | direct")
      ->check(CLI::IsMember(
          {"nfft-lanczos", "nystrom", "nystrom-gauss-nfft", "direct"}));
  cmd->add_option("--k", opts->k, "number of eigenpairs / clusters");
  cmd->add_option("--L", opts->sketch_l, "landmark or sketch column count");
  cmd->add_option("--M", opts->sketch_m, "retained sketch eigenvalue count");
  cmd->add_option("--tol", opts->tol, "solver tolerance");
  cmd->add_flag("--with-reference", opts->with_reference,
                "also compute the dense reference metrics");
}

KernelSpec make_kernel(const CommonOpts& opts) {
  if (opts.kernel_name == "gaussian") return KernelSpec::gaussian(opts.sigma);
  if (opts.kernel_name == "laplacian-rbf")
    return KernelSpec::laplacian_rbf(opts.sigma);
  if (opts.kernel_name == "multiquadric")
    return KernelSpec::multiquadric(opts.c);
  return KernelSpec::inverse_multiquadric(opts.c);
}

FastsumParams make_params(const CommonOpts& opts) {
  FastsumParams params =
      FastsumParams::preset(opts.setup, opts.eps_b < 0.0 ? 0.0 : opts.eps_b);
  if (opts.bandwidth > 0) params.bandwidth = opts.bandwidth;
  if (opts.cutoff > 0) {
    params.cutoff = opts.cutoff;
    params.smoothness = opts.cutoff;
  }
  if (opts.smoothness > 0) params.smoothness = opts.smoothness;
  return params;
}

Json echo_common(const CommonOpts& opts, int effective_threads) {
  FastsumParams params = make_params(opts);
  return Json{{"in", opts.in},
              {"out", opts.out},
              {"kernel", opts.kernel_name},
              {"sigma", opts.sigma},
              {"c", opts.c},
              {"setup", opts.setup},
              {"bandwidth", params.bandwidth},
              {"cutoff", params.cutoff},
              {"smoothness", params.smoothness},
              {"eps_b", params.eps_b},
              {"method", opts.method},
              {"k", opts.k},
              {"L", opts.sketch_l},
              {"M", opts.sketch_m},
              {"tol", opts.tol},
              {"threads_requested", opts.threads},
              {"threads_effective", effective_threads},
              {"with_reference", opts.with_reference}};
}

int effective_threads(const CommonOpts& opts) {
  const char* env = std::getenv("FGS_DETERMINISTIC");
  if (env && std::string(env) == "1") return 1;
  // The library executes serially regardless; a nonpositive request means
  // "default", anything else is honored as a documented upper bound of 1.
  (void)opts;
  return 1;
}

double lanczos_tol(const CommonOpts& opts) {
  return opts.tol > 0.0 ? opts.tol : 1e-12;
}

/// Eigenpairs of the normalized adjacency by the selected method.
EigenPairs solve_pairs(const PointCloud& cloud, const KernelSpec& kernel,
                       const FastsumParams& params, const CommonOpts& opts,
                       Report* report) {
  LanczosOptions lopts;
  lopts.tol = lanczos_tol(opts);
  lopts.seed = opts.seed;
  EigenPairs pairs;
  if (opts.method == "nfft-lanczos" || opts.method == "direct") {
    const AdjacencyBackend backend = opts.method == "direct"
                                         ? AdjacencyBackend::Direct
                                         : AdjacencyBackend::Fastsum;
    Timer setup;
    AdjacencyOperator op(cloud.coordinates, kernel, params, backend);
    report->add_timing("setup", setup.seconds());
    Timer solve;
    LanczosInfo info;
    pairs = lanczos_largest(adjacency_handle(op), opts.k, lopts, &info);
    report->add_timing("solve", solve.seconds());
    report->add_metric("lanczos_iterations", info.iterations,
                       "Lanczos steps executed");
    report->add_metric("lanczos_converged", info.converged ? 1.0 : 0.0,
                       "1 if every wanted Ritz pair met the tolerance");
    report->add_metric(
        "max_residual_operator", max_residual(adjacency_handle(op), pairs),
        "max_i ||A v_i - lambda_i v_i||_2 with the operator used for the "
        "solve (approximate for nfft-lanczos)");
  } else if (opts.method == "nystrom") {
    NystromOptions nopts;
    nopts.k = opts.k;
    nopts.L = opts.sketch_l;
    nopts.M = opts.sketch_m;
    nopts.seed = opts.seed;
    Timer solve;
    pairs = nystrom_traditional(cloud.coordinates, kernel, nopts);
    report->add_timing("solve", solve.seconds());
  } else {  // nystrom-gauss-nfft
    NystromOptions nopts;
    nopts.k = opts.k;
    nopts.L = opts.sketch_l;
    nopts.M = opts.sketch_m;
    nopts.seed = opts.seed;
    Timer setup;
    AdjacencyOperator op(cloud.coordinates, kernel, params);
    report->add_timing("setup", setup.seconds());
    Timer solve;
    pairs = nystrom_gaussian(adjacency_handle(op), nopts);
    report->add_timing("solve", solve.seconds());
    report->add_metric(
        "max_residual_operator", max_residual(adjacency_handle(op), pairs),
        "max_i ||A v_i - lambda_i v_i||_2 with the operator used for the "
        "solve (approximate for nystrom-gauss-nfft)");
  }
  report->eigenvalues.assign(pairs.values.data(),
                             pairs.values.data() + pairs.count());
  return pairs;
}

/// Eq.-style reference metrics: eigenvalue error against the dense solve and
/// residuals through exact operator applies.
void add_reference_metrics(const PointCloud& cloud, const KernelSpec& kernel,
                           const EigenPairs& pairs, Report* report) {
  if (cloud.size() > kReferenceBudget) {
    report->extra["reference_skipped"] =
        "point count exceeds the dense-reference budget of " +
        std::to_string(kReferenceBudget);
    return;
  }
  Timer ref;
  SymmetricOperatorHandle exact =
      dense_reference_apply(cloud.coordinates, kernel,
                            cloud.size() <= 4096 ? DenseMode::Materialize
                                                 : DenseMode::Recompute);
  report->add_metric(
      "max_residual", max_residual(exact, pairs),
      "max_i ||A v_i - lambda_i v_i||_2 with exact operator applies");
  EigenPairs reference =
      dense_reference_eig(cloud.coordinates, kernel,
                          static_cast<int>(pairs.count()));
  double value_error = 0.0;
  for (Eigen::Index i = 0; i < pairs.count(); ++i)
    value_error = std::max(value_error,
                           std::abs(pairs.values(i) - reference.values(i)));
  report->add_metric("max_eigenvalue_error", value_error,
                     "max_i |lambda_i - lambda_i^dense| against the dense "
                     "reference eigensolve");
  report->add_timing("reference", ref.seconds());
}

int finish(Report& report, const std::string& report_path,
           const std::string& summary) {
  write_report(report, report_path);
  std::cout << summary;
  std::cout << "report: " << report_path << '\n';
  return report.status == "ok" ? 0 : 1;
}

/// Runs `body` with uniform numerical-failure handling: on NumericalError or
/// ResourceError the report is written with a diagnostic and the command
/// exits 1.
template <typename Body>
int guarded(Report& report, const std::string& report_path, Body&& body) {
  try {
    return body();
  } catch (const NumericalError& error) {
    report.status = "numerical-failure";
    report.diagnostic = error.what();
  } catch (const ResourceError& error) {
    report.status = "numerical-failure";
    report.diagnostic = error.what();
  }
  write_report(report, report_path);
  std::cerr << "numerical failure: " << report.diagnostic << '\n'
            << "report: " << report_path << '\n';
  return 1;
}

std::vector<int> require_labels(const PointCloud& cloud) {
  if (!cloud.has_labels())
    throw ParameterError("this command needs a labeled input CSV "
                         "(final `label` column)");
  return cloud.labels;
}

int count_classes(const std::vector<int>& labels) {
  int n_classes = 0;
  for (int label : labels) {
    if (label < 0) throw RangeError("labels must be nonnegative");
    n_classes = std::max(n_classes, label + 1);
  }
  return n_classes;
}

// ---- gen ------------------------------------------------------------------

struct GenOpts {
  CommonOpts common;
  bool spiral = false;
  bool crescent = false;
  int classes = 5;
  int per_class = 400;
  double h = 10.0;
  double r = 2.0;
  Eigen::Index n = 10000;
  double r1 = 5.0, r2 = 5.0, r3 = 8.0;
};

int run_gen(const GenOpts& opts) {
  if (opts.spiral == opts.crescent)
    throw ParameterError("choose exactly one of --spiral and "
                         "--crescent-fullmoon");
  Report report;
  report.command = "gen";
  report.seed = opts.common.seed;
  PointCloud cloud;
  Timer timer;
  if (opts.spiral) {
    report.method = "spiral";
    cloud = gen_spiral(opts.classes, opts.per_class, opts.h, opts.r,
                       opts.common.seed);
    report.parameters = Json{{"classes", opts.classes},
                             {"per_class", opts.per_class},
                             {"h", opts.h},
                             {"r", opts.r},
                             {"out", opts.common.out}};
  } else {
    report.method = "crescent-fullmoon";
    cloud = gen_crescent_fullmoon(opts.n, opts.r1, opts.r2, opts.r3,
                                  opts.common.seed);
    report.parameters = Json{{"n", opts.n},
                             {"r1", opts.r1},
                             {"r2", opts.r2},
                             {"r3", opts.r3},
                             {"out", opts.common.out}};
  }
  save_points_csv(cloud, opts.common.out);
  report.add_timing("generate", timer.seconds());
  report.add_metric("n", static_cast<double>(cloud.size()),
                    "number of generated points");
  return finish(report, opts.common.out + ".report.json",
                "generated " + std::to_string(cloud.size()) + " points -> " +
                    opts.common.out + '\n');
}

// ---- eigs -----------------------------------------------------------------

int run_eigs(const CommonOpts& opts) {
  Report report;
  report.command = "eigs";
  report.method = opts.method;
  report.seed = opts.seed;
  report.parameters = echo_common(opts, effective_threads(opts));
  return guarded(report, opts.out, [&] {
    PointCloud cloud = load_points_csv(opts.in);
    KernelSpec kernel = make_kernel(opts);
    FastsumParams params = make_params(opts);
    EigenPairs pairs = solve_pairs(cloud, kernel, params, opts, &report);
    if (opts.with_reference)
      add_reference_metrics(cloud, kernel, pairs, &report);
    std::string summary = "eigs: n=" + std::to_string(cloud.size()) +
                          " k=" + std::to_string(pairs.count()) +
                          " lambda_1=" + std::to_string(pairs.values(0)) +
                          '\n';
    return finish(report, opts.out, summary);
  });
}

// ---- cluster --------------------------------------------------------------

int run_cluster(const CommonOpts& opts) {
  Report report;
  report.command = "cluster";
  report.method = opts.method;
  report.seed = opts.seed;
  report.parameters = echo_common(opts, effective_threads(opts));
  return guarded(report, opts.out, [&] {
    PointCloud cloud = load_points_csv(opts.in);
    KernelSpec kernel = make_kernel(opts);
    FastsumParams params = make_params(opts);
    EigenPairs pairs = solve_pairs(cloud, kernel, params, opts, &report);
    KMeansOptions kopts;
    kopts.seed = opts.seed;
    Timer cluster_time;
    std::vector<int> labels = spectral_cluster(pairs, opts.k, kopts);
    report.add_timing("cluster", cluster_time.seconds());
    save_labels_csv(labels, opts.out + ".labels.csv");
    std::string summary =
        "cluster: n=" + std::to_string(cloud.size()) + " into " +
        std::to_string(opts.k) + " groups\n";
    if (cloud.has_labels()) {
      double rate = misclassification_rate_permuted(labels, cloud.labels);
      report.add_metric("misclassification_rate_permuted", rate,
                        "fraction of points whose cluster disagrees with the "
                        "input label, minimized over cluster relabelings");
      summary += "misclassification (best relabeling): " +
                 std::to_string(rate) + '\n';
    }
    return finish(report, opts.out, summary);
  });
}

// ---- segment --------------------------------------------------------------

std::string with_suffix(const std::string& path, const std::string& suffix) {
  const std::size_t dot = path.find_last_of('.');
  if (dot == std::string::npos) return path + suffix;
  return path.substr(0, dot) + suffix + path.substr(dot);
}

int run_segment(const CommonOpts& opts) {
  Report report;
  report.command = "segment";
  report.method = opts.method;
  report.seed = opts.seed;
  report.parameters = echo_common(opts, effective_threads(opts));
  const std::string report_path = opts.out + ".report.json";
  return guarded(report, report_path, [&] {
    int width = 0, height = 0;
    PointCloud cloud = image_to_nodes(opts.in, &width, &height);
    KernelSpec kernel = make_kernel(opts);
    FastsumParams params = make_params(opts);
    EigenPairs pairs = solve_pairs(cloud, kernel, params, opts, &report);
    KMeansOptions kopts;
    kopts.seed = opts.seed;
    Timer cluster_time;
    std::vector<int> labels = spectral_cluster(pairs, opts.k, kopts);
    report.add_timing("cluster", cluster_time.seconds());
    labels_to_image(labels, width, height, default_palette(opts.k), opts.out);
    std::string summary = "segment: " + std::to_string(width) + "x" +
                          std::to_string(height) + " -> " + opts.out + '\n';
    if (opts.with_reference) {
      if (cloud.size() > kReferenceBudget) {
        report.extra["reference_skipped"] =
            "pixel count exceeds the dense-reference budget";
      } else {
        EigenPairs dense_pairs =
            dense_reference_eig(cloud.coordinates, kernel, opts.k);
        std::vector<int> dense_labels =
            spectral_cluster(dense_pairs, opts.k, kopts);
        double differing = 0.0;
        for (std::size_t p = 0; p < labels.size(); ++p)
          if (labels[p] != dense_labels[p]) differing += 1.0;
        const double fraction = differing / static_cast<double>(labels.size());
        report.add_metric(
            "label_difference_fraction", fraction,
            "fraction of pixels labeled differently from the dense-reference "
            "segmentation (same clustering seed)");
        difference_image(labels, dense_labels, width, height,
                         with_suffix(opts.out, ".diff"));
        summary += "difference vs dense reference: " +
                   std::to_string(fraction) + '\n';
      }
    }
    return finish(report, report_path, summary);
  });
}

// ---- ssl-pf ---------------------------------------------------------------

struct SslPfOpts {
  CommonOpts common;
  int samples_per_class = 25;
  double tau = 0.1;
  double eps_ac = 10.0;
  double omega0 = 1e4;
  double conv_c = -1.0;  // < 0 = 2/eps_ac + omega0
  int max_steps = 500;
};

int run_ssl_pf(const SslPfOpts& opts) {
  Report report;
  report.command = "ssl-pf";
  report.method = opts.common.method;
  report.seed = opts.common.seed;
  report.parameters = echo_common(opts.common,
                                  effective_threads(opts.common));
  report.parameters["samples_per_class"] = opts.samples_per_class;
  report.parameters["tau"] = opts.tau;
  report.parameters["eps_ac"] = opts.eps_ac;
  report.parameters["omega0"] = opts.omega0;
  report.parameters["max_steps"] = opts.max_steps;
  return guarded(report, opts.common.out, [&] {
    PointCloud cloud = load_points_csv(opts.common.in);
    std::vector<int> truth = require_labels(cloud);
    const int n_classes = count_classes(truth);
    KernelSpec kernel = make_kernel(opts.common);
    FastsumParams params = make_params(opts.common);
    EigenPairs adjacency =
        solve_pairs(cloud, kernel, params, opts.common, &report);
    EigenPairs laplacian = adjacency_to_laplacian(adjacency);
    TrainingSelection selection = select_training(
        truth, n_classes, opts.samples_per_class, opts.common.seed);
    AllenCahnParams ac;
    ac.tau = opts.tau;
    ac.eps_ac = opts.eps_ac;
    ac.omega0 = opts.omega0;
    ac.c = opts.conv_c > 0.0 ? opts.conv_c
                             : 2.0 / opts.eps_ac + opts.omega0;
    ac.tol = opts.common.tol > 0.0 ? opts.common.tol : 1e-10;
    ac.max_steps = opts.max_steps;
    report.parameters["conv_c"] = ac.c;
    Timer evolve;
    AllenCahnInfo info;
    std::vector<int> predicted =
        allen_cahn_ssl(laplacian, selection, ac, n_classes, &info);
    report.add_timing("evolve", evolve.seconds());
    save_labels_csv(predicted, opts.common.out + ".labels.csv");
    const double rate = misclassification_rate(predicted, truth);
    report.add_metric("misclassification_rate", rate,
                      "fraction of points labeled differently from the "
                      "ground-truth labels of the input");
    report.add_metric("steps", info.steps,
                      "largest phase-field step count over channels");
    report.add_metric("converged", info.converged ? 1.0 : 0.0,
                      "1 if every channel met the relative-change tolerance");
    std::string summary = "ssl-pf: misclassification " +
                          std::to_string(rate) + " after " +
                          std::to_string(info.steps) + " steps\n";
    if (!info.converged) {
      report.status = "numerical-failure";
      report.diagnostic = "phase-field evolution hit the step cap before "
                          "meeting the tolerance";
    }
    return finish(report, opts.common.out, summary);
  });
}

// ---- ssl-kernel -----------------------------------------------------------

struct SslKernelOpts {
  CommonOpts common;
  int samples_per_class = 25;
  double beta = 1e4;
  int truncate_k = 0;  // > 0: solve in a truncated eigenbasis of this size
  int max_iter = 1000;
};

int run_ssl_kernel(const SslKernelOpts& opts) {
  Report report;
  report.command = "ssl-kernel";
  report.method = opts.truncate_k > 0 ? "truncated-eig" : "cg";
  report.seed = opts.common.seed;
  report.parameters = echo_common(opts.common,
                                  effective_threads(opts.common));
  report.parameters["samples_per_class"] = opts.samples_per_class;
  report.parameters["beta"] = opts.beta;
  report.parameters["truncate_k"] = opts.truncate_k;
  report.parameters["max_iter"] = opts.max_iter;
  return guarded(report, opts.common.out, [&] {
    PointCloud cloud = load_points_csv(opts.common.in);
    std::vector<int> truth = require_labels(cloud);
    const int n_classes = count_classes(truth);
    if (n_classes < 2)
      throw ParameterError("kernel SSL needs at least two classes");
    KernelSpec kernel = make_kernel(opts.common);
    FastsumParams params = make_params(opts.common);
    const double tol = opts.common.tol > 0.0 ? opts.common.tol : 1e-4;
    TrainingSelection selection = select_training(
        truth, n_classes, opts.samples_per_class, opts.common.seed);

    Timer setup;
    const AdjacencyBackend backend = opts.common.method == "direct"
                                         ? AdjacencyBackend::Direct
                                         : AdjacencyBackend::Fastsum;
    AdjacencyOperator op(cloud.coordinates, kernel, params, backend);
    report.add_timing("setup", setup.seconds());

    std::optional<EigenPairs> basis;
    LanczosInfo basis_info;
    if (opts.truncate_k > 0) {
      LanczosOptions lopts;
      lopts.seed = opts.common.seed;
      // Diffusion spectra of wide kernel graphs cluster tightly below the
      // Perron value, so resolving the leading eigenbasis takes thousands of
      // Krylov steps; a residual level of 1e-8 is far below what the filter
      // weights can distinguish.
      lopts.tol = 1e-8;
      lopts.max_iter = 6000;
      Timer eig;
      basis =
          lanczos_largest(adjacency_handle(op), opts.truncate_k, lopts,
                          &basis_info);
      report.add_timing("eig", eig.seconds());
    }

    const int channels = n_classes == 2 ? 1 : n_classes;
    MatrixXd fields(cloud.size(), channels);
    int max_iterations = 0;
    bool all_converged = true;
    Timer solve;
    for (int ch = 0; ch < channels; ++ch) {
      VectorXd f = fidelity_vector(selection, cloud.size(), ch);
      if (basis) {
        fields.col(ch) = kernel_ssl_truncated(*basis, f, opts.beta);
      } else {
        CgResult result =
            kernel_ssl_solve(op, f, opts.beta, tol, opts.max_iter);
        fields.col(ch) = result.x;
        max_iterations = std::max(max_iterations, result.iterations);
        all_converged = all_converged && result.converged();
      }
    }
    report.add_timing("solve", solve.seconds());

    std::vector<int> predicted(static_cast<std::size_t>(cloud.size()));
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
      if (channels == 1) {
        predicted[static_cast<std::size_t>(i)] = fields(i, 0) >= 0.0 ? 0 : 1;
      } else {
        Eigen::Index best = 0;
        fields.row(i).maxCoeff(&best);
        predicted[static_cast<std::size_t>(i)] = static_cast<int>(best);
      }
    }
    save_labels_csv(predicted, opts.common.out + ".labels.csv");
    const double rate = misclassification_rate(predicted, truth);
    report.add_metric("misclassification_rate", rate,
                      "fraction of points labeled differently from the "
                      "ground-truth labels of the input");
    if (!basis) {
      report.add_metric("cg_iterations", max_iterations,
                        "largest conjugate-gradient iteration count over "
                        "channels");
      report.add_metric("cg_converged", all_converged ? 1.0 : 0.0,
                        "1 if every channel met the CG tolerance");
      if (!all_converged) {
        report.status = "numerical-failure";
        report.diagnostic =
            "conjugate gradients hit the iteration cap before meeting the "
            "tolerance";
      }
    } else {
      report.add_metric("basis_iterations", basis_info.iterations,
                        "Krylov steps spent computing the truncated "
                        "eigenbasis");
      report.add_metric("basis_converged", basis_info.converged ? 1.0 : 0.0,
                        "1 if every basis pair met the residual tolerance");
      if (!basis_info.converged) {
        report.status = "numerical-failure";
        report.diagnostic =
            "the truncated eigenbasis hit the iteration cap before meeting "
            "the residual tolerance";
      }
    }
    std::string summary =
        "ssl-kernel: misclassification " + std::to_string(rate) + '\n';
    return finish(report, opts.common.out, summary);
  });
}

// ---- krr ------------------------------------------------------------------

struct KrrOpts {
  CommonOpts common;
  double beta = 1e-3;
  int max_iter = 1000;
};

int run_krr(const KrrOpts& opts) {
  Report report;
  report.command = "krr";
  report.method = "krr";
  report.seed = opts.common.seed;
  report.parameters = echo_common(opts.common,
                                  effective_threads(opts.common));
  report.parameters["beta"] = opts.beta;
  report.parameters["max_iter"] = opts.max_iter;
  return guarded(report, opts.common.out, [&] {
    PointCloud cloud = load_points_csv(opts.common.in);
    std::vector<int> truth = require_labels(cloud);
    const int n_classes = count_classes(truth);
    if (n_classes < 2)
      throw ParameterError("classification needs at least two classes");
    KernelSpec kernel = make_kernel(opts.common);
    FastsumParams params = make_params(opts.common);
    const double tol = opts.common.tol > 0.0 ? opts.common.tol : 1e-6;

    const int channels = n_classes == 2 ? 1 : n_classes;
    MatrixXd scores(cloud.size(), channels);
    int max_iterations = 0;
    Timer fit_time;
    for (int ch = 0; ch < channels; ++ch) {
      VectorXd targets(cloud.size());
      const int positive = channels == 1 ? 0 : ch;
      for (Eigen::Index i = 0; i < cloud.size(); ++i)
        targets(i) =
            truth[static_cast<std::size_t>(i)] == positive ? 1.0 : -1.0;
      RidgeModel model = krr_fit(cloud.coordinates, kernel, opts.beta,
                                 targets, params, tol, opts.max_iter);
      max_iterations = std::max(max_iterations, model.cg_iterations);
      scores.col(ch) = krr_predict(model, cloud.coordinates);
    }
    report.add_timing("fit_and_predict", fit_time.seconds());

    std::vector<int> predicted(static_cast<std::size_t>(cloud.size()));
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
      if (channels == 1) {
        predicted[static_cast<std::size_t>(i)] = scores(i, 0) >= 0.0 ? 0 : 1;
      } else {
        Eigen::Index best = 0;
        scores.row(i).maxCoeff(&best);
        predicted[static_cast<std::size_t>(i)] = static_cast<int>(best);
      }
    }
    save_labels_csv(predicted, opts.common.out + ".labels.csv");
    const double accuracy =
        1.0 - misclassification_rate(predicted, truth);
    report.add_metric("train_accuracy", accuracy,
                      "fraction of training points whose predicted class "
                      "matches the label");
    report.add_metric("cg_iterations", max_iterations,
                      "largest conjugate-gradient iteration count over "
                      "channels");
    return finish(report, opts.common.out,
                  "krr: train accuracy " + std::to_string(accuracy) + '\n');
  });
}

// ---- bench ----------------------------------------------------------------

struct BenchOpts {
  CommonOpts common;
  std::vector<Eigen::Index> sizes{8000, 16000, 32000, 64000};
  std::vector<std::string> methods{"nfft-lanczos"};
  int trials = 1;
  int applies = 5;
};

int run_bench(const BenchOpts& opts) {
  Report report;
  report.command = "bench";
  report.method = "sweep";
  report.seed = opts.common.seed;
  report.parameters = echo_common(opts.common,
                                  effective_threads(opts.common));
  report.parameters["sizes"] = opts.sizes;
  report.parameters["methods"] = opts.methods;
  report.parameters["trials"] = opts.trials;
  for (const std::string& method : opts.methods)
    if (method != "nfft-lanczos" && method != "nystrom" &&
        method != "nystrom-gauss-nfft" && method != "direct")
      throw ParameterError("unknown bench method " + method);
  return guarded(report, opts.common.out, [&] {
    KernelSpec kernel = make_kernel(opts.common);
    FastsumParams params = make_params(opts.common);
    Json cells = Json::array();
    std::string summary;
    std::vector<double> matvec_seconds_by_size;
    for (const std::string& method : opts.methods) {
      for (Eigen::Index n : opts.sizes) {
        if (n % 5 != 0)
          throw ParameterError(
              "bench sizes must be divisible by the 5 spiral classes");
        std::vector<double> value_errors, residuals;
        double setup_seconds = 0.0, matvec_seconds = 0.0, solve_seconds = 0.0;
        for (int trial = 0; trial < opts.trials; ++trial) {
          const std::uint64_t seed = opts.common.seed + trial;
          PointCloud cloud =
              gen_spiral(5, static_cast<int>(n / 5), 10.0, 2.0, seed);
          CommonOpts cell = opts.common;
          cell.method = method;
          cell.seed = seed;
          Report cell_report;  // timing sink; metrics are aggregated below
          Timer setup;
          std::optional<AdjacencyOperator> op;
          if (method != "nystrom")
            op.emplace(cloud.coordinates, kernel, params,
                       method == "direct" ? AdjacencyBackend::Direct
                                          : AdjacencyBackend::Fastsum);
          setup_seconds += setup.seconds();
          if (op) {
            std::mt19937_64 rng(seed);
            std::normal_distribution<double> gauss;
            VectorXd x(n);
            for (Eigen::Index i = 0; i < n; ++i) x(i) = gauss(rng);
            Timer matvec;
            for (int a = 0; a < opts.applies; ++a)
              x = op->apply_normalized(x).eval();
            matvec_seconds += matvec.seconds() / opts.applies;
          }
          Timer solve;
          EigenPairs pairs = solve_pairs(cloud, kernel, params, cell,
                                         &cell_report);
          solve_seconds += solve.seconds();
          if (opts.common.with_reference && n <= kReferenceBudget) {
            SymmetricOperatorHandle exact = dense_reference_apply(
                cloud.coordinates, kernel,
                n <= 4096 ? DenseMode::Materialize : DenseMode::Recompute);
            residuals.push_back(max_residual(exact, pairs));
            EigenPairs reference = dense_reference_eig(
                cloud.coordinates, kernel, static_cast<int>(pairs.count()));
            double err = 0.0;
            for (Eigen::Index i = 0; i < pairs.count(); ++i)
              err = std::max(err,
                             std::abs(pairs.values(i) - reference.values(i)));
            value_errors.push_back(err);
          }
        }
        Json cell{{"method", method},
                  {"n", n},
                  {"trials", opts.trials},
                  {"setup_seconds", setup_seconds / opts.trials},
                  {"matvec_seconds", matvec_seconds / opts.trials},
                  {"solve_seconds", solve_seconds / opts.trials}};
        if (!value_errors.empty()) {
          auto stats = [](std::vector<double> v) {
            double lo = v[0], hi = v[0], sum = 0.0;
            for (double x : v) {
              lo = std::min(lo, x);
              hi = std::max(hi, x);
              sum += x;
            }
            return Json{{"min", lo},
                        {"avg", sum / static_cast<double>(v.size())},
                        {"max", hi}};
          };
          cell["eigenvalue_error"] = stats(value_errors);
          cell["residual"] = stats(residuals);
          cell["eigenvalue_error"]["definition"] =
              "max_i |lambda_i - lambda_i^dense| per trial, aggregated";
          cell["residual"]["definition"] =
              "max_i ||A v_i - lambda_i v_i||_2 with exact applies per "
              "trial, aggregated";
        }
        cells.push_back(cell);
        if (method == opts.methods.front())
          matvec_seconds_by_size.push_back(matvec_seconds / opts.trials);
        summary += method + " n=" + std::to_string(n) + ": matvec " +
                   std::to_string(matvec_seconds / opts.trials) +
                   " s, solve " + std::to_string(solve_seconds / opts.trials) +
                   " s\n";
      }
    }
    report.extra["cells"] = cells;
    if (matvec_seconds_by_size.size() >= 2 &&
        matvec_seconds_by_size.front() > 0.0)
      report.add_metric(
          "matvec_time_ratio", matvec_seconds_by_size.back() /
                                   matvec_seconds_by_size.front(),
          "average fast matvec time at the largest size divided by the "
          "smallest size, first method");
    return finish(report, opts.common.out, summary);
  });
}

} // namespace

int run(int argc, char** argv) {
  CLI::App app{"Matrix-free spectral toolkit for fully connected kernel "
               "graphs"};
  app.require_subcommand(1);

  GenOpts gen;
  CLI::App* gen_cmd =
      app.add_subcommand("gen", "generate a labeled benchmark point set");
  gen_cmd->add_flag("--spiral", gen.spiral, "labeled 3-D spiral");
  gen_cmd->add_flag("--crescent-fullmoon", gen.crescent,
                    "2-D two-class crescent/full-moon set");
  gen_cmd->add_option("--classes", gen.classes, "spiral class count");
  gen_cmd->add_option("--per-class", gen.per_class, "spiral points per class");
  gen_cmd->add_option("--height", gen.h, "spiral height");
  gen_cmd->add_option("--radius", gen.r, "spiral radius");
  gen_cmd->add_option("--n", gen.n, "crescent-fullmoon point count");
  gen_cmd->add_option("--r1", gen.r1, "full-moon radius");
  gen_cmd->add_option("--r2", gen.r2, "crescent inner radius");
  gen_cmd->add_option("--r3", gen.r3, "crescent outer radius");
  add_io_flags(gen_cmd, &gen.common, /*in_required=*/false);

  CommonOpts eigs;
  CLI::App* eigs_cmd =
      app.add_subcommand("eigs", "dominant eigenpairs of the normalized "
                                 "adjacency");
  add_io_flags(eigs_cmd, &eigs, true);
  add_kernel_flags(eigs_cmd, &eigs);
  add_fastsum_flags(eigs_cmd, &eigs);
  add_method_flags(eigs_cmd, &eigs, "nfft-lanczos");

  CommonOpts cluster;
  CLI::App* cluster_cmd =
      app.add_subcommand("cluster", "spectral clustering of a point set");
  add_io_flags(cluster_cmd, &cluster, true);
  add_kernel_flags(cluster_cmd, &cluster);
  add_fastsum_flags(cluster_cmd, &cluster);
  add_method_flags(cluster_cmd, &cluster, "nfft-lanczos");

  CommonOpts segment;
  CLI::App* segment_cmd =
      app.add_subcommand("segment", "spectral segmentation of an RGB image");
  add_io_flags(segment_cmd, &segment, true);
  add_kernel_flags(segment_cmd, &segment);
  add_fastsum_flags(segment_cmd, &segment);
  add_method_flags(segment_cmd, &segment, "nfft-lanczos");
  segment.sigma = 90.0;
  segment.k = 4;

  SslPfOpts ssl_pf;
  CLI::App* ssl_pf_cmd = app.add_subcommand(
      "ssl-pf", "phase-field semi-supervised classification");
  add_io_flags(ssl_pf_cmd, &ssl_pf.common, true);
  add_kernel_flags(ssl_pf_cmd, &ssl_pf.common);
  add_fastsum_flags(ssl_pf_cmd, &ssl_pf.common);
  add_method_flags(ssl_pf_cmd, &ssl_pf.common, "nfft-lanczos");
  ssl_pf_cmd->add_option("--samples-per-class", ssl_pf.samples_per_class,
                         "labeled training points per class");
  ssl_pf_cmd->add_option("--tau", ssl_pf.tau, "time step");
  ssl_pf_cmd->add_option("--eps-ac", ssl_pf.eps_ac, "interface parameter");
  ssl_pf_cmd->add_option("--omega0", ssl_pf.omega0, "fidelity strength");
  ssl_pf_cmd->add_option("--conv-c", ssl_pf.conv_c,
                         "convexity-splitting constant (default "
                         "2/eps-ac + omega0)");
  ssl_pf_cmd->add_option("--max-steps", ssl_pf.max_steps, "step cap");

  SslKernelOpts ssl_kernel;
  CLI::App* ssl_kernel_cmd = app.add_subcommand(
      "ssl-kernel", "Laplacian-regularized kernel semi-supervised learning");
  add_io_flags(ssl_kernel_cmd, &ssl_kernel.common, true);
  add_kernel_flags(ssl_kernel_cmd, &ssl_kernel.common);
  add_fastsum_flags(ssl_kernel_cmd, &ssl_kernel.common);
  ssl_kernel_cmd
      ->add_option("--method", ssl_kernel.common.method,
                   "nfft-lanczos (fast operator) | direct (exact operator)")
      ->check(CLI::IsMember({"nfft-lanczos", "direct"}));
  ssl_kernel_cmd->add_option("--samples-per-class",
                             ssl_kernel.samples_per_class,
                             "labeled training points per class");
  ssl_kernel_cmd->add_option("--beta", ssl_kernel.beta,
                             "Laplacian regularization weight");
  ssl_kernel_cmd->add_option("--k", ssl_kernel.truncate_k,
                             "if > 0, solve in a truncated eigenbasis of "
                             "this size instead of running CG");
  ssl_kernel_cmd->add_option("--tol", ssl_kernel.common.tol, "CG tolerance");
  ssl_kernel_cmd->add_option("--max-iter", ssl_kernel.max_iter,
                             "CG iteration cap");

  KrrOpts krr;
  CLI::App* krr_cmd = app.add_subcommand(
      "krr", "kernel ridge regression classification on labeled data");
  add_io_flags(krr_cmd, &krr.common, true);
  add_kernel_flags(krr_cmd, &krr.common);
  add_fastsum_flags(krr_cmd, &krr.common);
  krr_cmd->add_option("--beta", krr.beta, "ridge regularization weight");
  krr_cmd->add_option("--tol", krr.common.tol, "CG tolerance");
  krr_cmd->add_option("--max-iter", krr.max_iter, "CG iteration cap");

  BenchOpts bench;
  CLI::App* bench_cmd = app.add_subcommand(
      "bench", "timing and accuracy sweep over methods and sizes");
  add_io_flags(bench_cmd, &bench.common, false);
  add_kernel_flags(bench_cmd, &bench.common);
  add_fastsum_flags(bench_cmd, &bench.common);
  bench_cmd->add_option("--k", bench.common.k, "eigenpairs per solve");
  bench_cmd->add_option("--L", bench.common.sketch_l, "landmarks / sketch");
  bench_cmd->add_option("--M", bench.common.sketch_m, "sketch retained count");
  bench_cmd->add_option("--tol", bench.common.tol, "eigensolver tolerance");
  bench_cmd->add_flag("--with-reference", bench.common.with_reference,
                      "compute dense-reference metrics (small sizes only)");
  bench_cmd->add_option("--sizes", bench.sizes, "point counts to sweep")
      ->delimiter(',');
  bench_cmd->add_option("--methods", bench.methods, "methods to sweep")
      ->delimiter(',');
  bench_cmd->add_option("--trials", bench.trials, "seeded repetitions");
  bench_cmd->add_option("--applies", bench.applies,
                        "matvec applications per timing");
  bench.common.sigma = 3.5;

  try {
    app.parse(argc, argv);
    if (*gen_cmd) return run_gen(gen);
    if (*eigs_cmd) return run_eigs(eigs);
    if (*cluster_cmd) return run_cluster(cluster);
    if (*segment_cmd) return run_segment(segment);
    if (*ssl_pf_cmd) return run_ssl_pf(ssl_pf);
    if (*ssl_kernel_cmd) return run_ssl_kernel(ssl_kernel);
    if (*krr_cmd) return run_krr(krr);
    if (*bench_cmd) return run_bench(bench);
    std::cerr << app.help();
    return 2;
  } catch (const CLI::CallForHelp& help) {
    app.exit(help);
    return 0;
  } catch (const CLI::ParseError& error) {
    app.exit(error);
    return 2;
  } catch (const ParameterError& error) {
    std::cerr << "usage error: " << error.what() << '\n';
    return 2;
  } catch (const RangeError& error) {
    std::cerr << "usage error: " << error.what() << '\n';
    return 2;
  } catch (const ShapeError& error) {
    std::cerr << "usage error: " << error.what() << '\n';
    return 2;
  } catch (const FormatError& error) {
    std::cerr << "usage error: " << error.what() << '\n';
    return 2;
  } catch (const ParseError& error) {
    std::cerr << "input error: " << error.what() << '\n';
    return 2;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << '\n';
    return 1;
  }
}

} // namespace fgs::cli
