#include "presets.hpp"

#include "dmuq/calibrate.hpp"
#include "dmuq/filter.hpp"
#include "dmuq/forecast.hpp"
#include "dmuq/io.hpp"
#include "dmuq/response.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

namespace fs = std::filesystem;
using namespace dmuq;
using nlohmann::json;

namespace {

constexpr int kUsageExit = 2;

int exit_code(ErrorCategory c) { return 10 + static_cast<int>(c); }

void apply_thread_override() {
  if (const char* env = std::getenv("DMUQ_THREADS")) {
    const int n = std::atoi(env);
    require(n >= 1, ErrorCategory::parameter, "DMUQ_THREADS must be a positive integer");
    omp_set_num_threads(n);
  }
}

Matrix moments_matrix(const MomentTable& table) {
  Matrix out(static_cast<Eigen::Index>(table.size()), 5);
  for (std::size_t k = 0; k < table.size(); ++k) {
    const auto& m = table.rows[k];
    out.row(static_cast<Eigen::Index>(k)) << table.times[k], m.mean, m.m2, m.m3, m.m4;
  }
  return out;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string system = "ou";
  std::size_t records = 10000;
  std::optional<std::size_t> record_every;
  std::optional<double> dt;
  double alpha = -1.0, a = 0.0, b = 0.0, D = 1.0;
  std::optional<double> sigma2;
  double gamma = 4.0 / 90.0;
  double eps_scale = std::sqrt(0.1);
  double x0 = 0.0;
  std::size_t spinup = 0;
  bool embed = false;
  std::uint64_t seed = 0;
  std::string output;
  std::string observe;
  double R_o = 1.0;
  double shift = 0.05;
  std::string observations;
};

void cmd_simulate(const SimulateArgs& s) {
  SampleSet series;
  if (s.system == "ou" || s.system == "reduced-double-well" || s.system == "perturbed-reduced-double-well") {
    SdeSpec spec;
    spec.seed = s.seed;
    spec.x0 = s.x0;
    if (s.system == "ou") {
      spec.kind = SdeKind::ou;
      spec.alpha = s.alpha;
      spec.a = s.a;
      spec.b = s.b;
      spec.D = s.D;
      spec.dt_int = s.dt.value_or(0.01);
    } else {
      spec.kind = s.system == "reduced-double-well" ? SdeKind::reduced_double_well
                                                    : SdeKind::perturbed_reduced_double_well;
      spec.sigma = std::sqrt(s.sigma2.value_or(kSigmaSquaredHomogenization));
      spec.dt_int = s.dt.value_or(0.002);
    }
    const std::size_t every = s.record_every.value_or(s.system == "ou" ? 20 : 50);
    series = euler_maruyama(spec, (s.records + s.spinup) * every, every);
  } else if (s.system == "double-well" || s.system == "perturbed-double-well" || s.system == "decoupled-double-well") {
    OdeSpec spec;
    spec.kind = s.system == "perturbed-double-well" ? OdeKind::perturbed_lorenz_double_well
                                                    : OdeKind::lorenz_double_well;
    spec.gamma = s.system == "decoupled-double-well" ? 0.0 : s.gamma;
    spec.eps_scale = s.eps_scale;
    spec.dt_int = s.dt.value_or(0.002);
    spec.initial[0] = s.x0;
    const std::size_t every = s.record_every.value_or(50);
    series = rk4(spec, (s.records + s.spinup) * every, every);
  } else {
    fail(ErrorCategory::parameter, "unknown system '" + s.system + "'");
  }
  if (s.spinup > 0) {
    const auto keep = static_cast<Eigen::Index>(s.records);
    PointMatrix tail = series.points().bottomRows(keep);
    series = SampleSet(std::move(tail), series.dt());
  }
  if (s.embed) {
    require(series.dim() == 1, ErrorCategory::parameter, "--embed applies to scalar series only");
    PointMatrix e(static_cast<Eigen::Index>(series.size()), 3);
    const double r5 = std::sqrt(5.0);
    for (Eigen::Index i = 0; i < e.rows(); ++i) {
      const double x = series.points()(i, 0);
      e.row(i) << std::sin(2.0 * x) / r5, std::cos(2.0 * x) / r5, x / r5;
    }
    series = SampleSet(std::move(e), series.dt());
  }
  write_series(s.output, series, *series.dt());
  if (!s.observe.empty()) {
    require(!s.observations.empty(), ErrorCategory::parameter, "--observe needs --observations FILE");
    const auto h = cli::observation_function({s.observe, s.shift});
    const Vector x = series.coordinate(0);
    const std::vector<double> xv(x.data(), x.data() + x.size());
    const auto z = synthesize_observations(xv, h, s.R_o, s.seed ^ 0x9e3779b97f4a7c15ull);
    Matrix out(static_cast<Eigen::Index>(z.size()), 2);
    for (std::size_t k = 0; k < z.size(); ++k)
      out.row(static_cast<Eigen::Index>(k)) << static_cast<double>(k + 1) * *series.dt(), z[k];
    write_csv(s.observations, {"t", "z_1"}, out);
  }
}

// ---------------------------------------------------------------------------

struct FitArgs {
  std::string input, output;
  std::size_t k = 8;
  Eigen::Index M = 50;
  std::size_t stride = 1;
  std::size_t neighbors = 1024;
  std::optional<double> D;
  std::uint64_t seed = 0x5eed;
};

void print_spectrum(const GeneratorModel& model) {
  std::printf("N = %lld, n = %zu, epsilon = %.6g, d = %.4f\n", static_cast<long long>(model.size()),
              model.points.dim(), model.epsilon, model.d);
  std::printf("lambda_0..4 =");
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(5, model.modes()); ++i) std::printf(" %.5f", model.lambdas(i));
  std::printf("\n");
}

void cmd_fit(const FitArgs& f, const std::string& params) {
  const SampleSet series = read_series(f.input);
  FitOptions options;
  options.pilot_k = f.k;
  options.M = f.M;
  options.kernel_neighbors = f.neighbors;
  options.eigen.seed = f.seed;
  const SampleSet training = series.subsample(f.stride);
  GeneratorModel model = fit_generator(training, options);
  print_spectrum(model);
  if (f.D) {
    require(*f.D > 0.0, ErrorCategory::parameter, "--D must be positive");
    model.D = *f.D;
  } else {
    const Calibration cal = calibrate(model, series);
    std::printf("T_c = %.6f, D = %.6f\n", cal.estimate.T_c, cal.estimate.D);
  }
  save_model(f.output, model, {fnv1a_hex(f.input), params, utc_timestamp()});
}

// ---------------------------------------------------------------------------

struct ForecastArgs {
  std::string model, output, snapshots_dir, times = "0:0.1:5", snapshot_times;
  cli::DensityPreset initial;
  std::size_t coordinate = 0;
  std::vector<int> powers;
};

void cmd_forecast(const ForecastArgs& a) {
  const GeneratorModel model = load_model(a.model);
  const auto times = cli::parse_times(a.times);
  ForecastOptions options;
  options.coordinate = a.coordinate;
  options.snapshots = false;
  const Vector x = model.points.coordinate(a.coordinate);
  for (int r : a.powers) options.observables.push_back(x.array().pow(r).matrix());
  const Vector p0 = cli::initial_density(a.initial, model, a.coordinate);
  const ForecastReport rep = forecast_report(p0, times, model, options);

  std::vector<std::string> header{"t", "mean", "m2", "m3", "m4"};
  for (int r : a.powers) header.push_back("E_x^" + std::to_string(r));
  Matrix table(static_cast<Eigen::Index>(times.size()), static_cast<Eigen::Index>(header.size()));
  table.leftCols(5) = moments_matrix(rep.moments);
  for (std::size_t k = 0; k < times.size(); ++k)
    for (std::size_t o = 0; o < a.powers.size(); ++o)
      table(static_cast<Eigen::Index>(k), 5 + static_cast<Eigen::Index>(o)) = rep.expectations[k][o];
  write_csv(a.output, header, table);

  if (!a.snapshot_times.empty()) {
    require(!a.snapshots_dir.empty(), ErrorCategory::parameter, "--snapshot-times needs --snapshots DIR");
    fs::create_directories(a.snapshots_dir);
    const CoefficientVector c0 = project_density(p0, model);
    std::vector<std::string> sh;
    for (std::size_t j = 0; j < model.points.dim(); ++j) sh.push_back("x_" + std::to_string(j + 1));
    sh.push_back("density");
    int frame = 0;
    for (double t : cli::parse_times(a.snapshot_times)) {
      const Vector p = reconstruct(normalize(propagate(c0, t, model), model), model);
      Matrix out(model.size(), static_cast<Eigen::Index>(sh.size()));
      out.leftCols(static_cast<Eigen::Index>(model.points.dim())) = model.points.points();
      out.rightCols(1) = p;
      char name[64];
      std::snprintf(name, sizeof(name), "frame_%04d.csv", frame++);
      write_csv(fs::path(a.snapshots_dir) / name, sh, out);
    }
  }
}

// ---------------------------------------------------------------------------

struct FilterArgs {
  std::string model, observations, output;
  cli::ObservationPreset h;
  double R_o = 1.0;
  cli::DensityPreset initial;
};

void cmd_filter(const FilterArgs& a) {
  const GeneratorModel model = load_model(a.model);
  const CsvTable table = read_csv(a.observations);
  require(table.column("t") == 0 && table.values.cols() >= 2, ErrorCategory::parse,
          a.observations + ": expected columns t, z_1..z_m");
  require(table.values.rows() >= 2, ErrorCategory::data, a.observations + ": need at least two observations");
  const double dt = table.values(1, 0) - table.values(0, 0);
  const Eigen::Index m = table.values.cols() - 1;
  require(m == 1, ErrorCategory::parameter, "the preset observation functions are scalar; expected one z column");
  const ObservationSeries obs = make_observations(table.values.rightCols(m), dt, a.R_o * Matrix::Identity(m, m));
  const auto h = cli::observation_function(a.h);
  const Vector x = model.points.coordinate(0);
  Matrix hs(model.size(), m);
  for (Eigen::Index j = 0; j < model.size(); ++j) hs(j, 0) = h(x(j));
  const ObservationOperator op = build_observation_operator(hs, model);
  const FilterResult res = run_filter(cli::initial_density(a.initial, model, 0), obs, op, model);

  const auto n = static_cast<Eigen::Index>(model.points.dim());
  std::vector<std::string> header{"t"};
  for (Eigen::Index j = 0; j < n; ++j) header.push_back("mean_" + std::to_string(j + 1));
  for (Eigen::Index j = 0; j < n; ++j) header.push_back("var_" + std::to_string(j + 1));
  for (const char* c : {"m3", "m4"}) header.push_back(c);
  Matrix out(static_cast<Eigen::Index>(res.steps.size()), static_cast<Eigen::Index>(header.size()));
  for (std::size_t k = 0; k < res.steps.size(); ++k) {
    const auto& s = res.steps[k];
    auto row = out.row(static_cast<Eigen::Index>(k));
    row(0) = table.values(static_cast<Eigen::Index>(k), 0);
    row.segment(1, n) = s.mean.transpose();
    row.segment(1 + n, n) = s.covariance.diagonal().transpose();
    row(1 + 2 * n) = s.moments.m3;
    row(2 + 2 * n) = s.moments.m4;
  }
  write_csv(a.output, header, out);
}

// ---------------------------------------------------------------------------

struct RespondArgs {
  std::string model, output, times = "0:0.5:30";
  cli::PerturbationPreset du;
  std::size_t coordinate = 0;
  Eigen::Index M = -1;
};

void cmd_respond(const RespondArgs& a) {
  const GeneratorModel model = load_model(a.model);
  const Vector du = cli::perturbation(a.du, model.points.coordinate(a.coordinate));
  std::optional<Eigen::Index> M;
  if (a.M >= 0) M = a.M;
  const GeneratorModel pert = build_perturbed_model(model, du, M);
  const MomentTable table = response_moments(pert, cli::parse_times(a.times), a.coordinate);
  write_csv(a.output, {"t", "d_mean", "d_m2", "d_m3", "d_m4"}, moments_matrix(table));
}

// ---------------------------------------------------------------------------

struct EstimateArgs {
  std::string model, input, output;
  Eigen::Index M = -1;
  bool update = false;
};

void cmd_estimate_d(const EstimateArgs& a) {
  ArtifactProvenance prov;
  GeneratorModel model = load_model(a.model, &prov);
  const SampleSet series = read_series(a.input);
  require(series.dim() == model.points.dim(), ErrorCategory::parameter, "series and model dimensions differ");
  const CorrelationCurve emp = autocorrelation(default_observable(series), *series.dt());
  const double T_c = correlation_time(emp);
  std::optional<Eigen::Index> M;
  if (a.M >= 0) M = a.M;
  const DiffusionEstimate est = estimate_diffusion(model, default_observable(model.points), T_c, M);
  std::printf("D = %.6f\nT_c = %.6f\nspectral_time = %.6f\n", est.D, est.T_c, est.spectral_time);
  if (!a.output.empty()) {
    Matrix out(est.projections.size(), 3);
    for (Eigen::Index i = 0; i < est.projections.size(); ++i) out.row(i) << i, model.lambdas(i), est.projections(i);
    write_csv(a.output, {"mode", "lambda", "projection"}, out);
  }
  if (a.update) {
    model.D = est.D;
    save_model(a.model, model, prov);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonparametric diffusion-maps models for forecasting, filtering and response"};
  app.set_config("--config", "", "key = value configuration file ([subcommand] sections)");
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "generate a training series");
  simulate->add_option("--system", sim.system, "ou | reduced-double-well | perturbed-reduced-double-well | "
                                                "double-well | perturbed-double-well | decoupled-double-well")
      ->capture_default_str();
  simulate->add_option("--records", sim.records, "number of recorded states")->capture_default_str();
  simulate->add_option("--record-every", sim.record_every, "integration steps per record (ou: 20, others: 50)");
  simulate->add_option("--dt", sim.dt, "integration step (ou: 0.01, others: 0.002)");
  simulate->add_option("--alpha", sim.alpha)->capture_default_str();
  simulate->add_option("--a", sim.a)->capture_default_str();
  simulate->add_option("--b", sim.b)->capture_default_str();
  simulate->add_option("--D", sim.D)->capture_default_str();
  simulate->add_option("--sigma2", sim.sigma2, "reduced-model noise variance (default 0.113; filtering preset 0.126)");
  simulate->add_option("--gamma", sim.gamma)->capture_default_str();
  simulate->add_option("--eps-scale", sim.eps_scale)->capture_default_str();
  simulate->add_option("--x0", sim.x0)->capture_default_str();
  simulate->add_option("--spinup", sim.spinup, "records discarded before output")->capture_default_str();
  simulate->add_flag("--embed", sim.embed, "map x to (sin 2x, cos 2x, x)/sqrt(5)");
  simulate->add_option("--seed", sim.seed, "RNG seed")->required();
  simulate->add_option("-o,--output", sim.output)->required();
  simulate->add_option("--observe", sim.observe, "also emit noisy observations: linear | abs | shifted-square");
  simulate->add_option("--R", sim.R_o, "observation noise variance")->capture_default_str();
  simulate->add_option("--shift", sim.shift, "shift of the shifted-square observation")->capture_default_str();
  simulate->add_option("--observations", sim.observations, "observation CSV path");

  FitArgs fit;
  auto* fitc = app.add_subcommand("fit", "fit a generator model to a series");
  fitc->add_option("-i,--input", fit.input)->required()->check(CLI::ExistingFile);
  fitc->add_option("-o,--output", fit.output)->required();
  fitc->add_option("--k", fit.k, "pilot density neighbours")->capture_default_str();
  fitc->add_option("--M", fit.M, "number of non-trivial modes")->capture_default_str();
  fitc->add_option("--stride", fit.stride, "subsampling stride for the basis")->capture_default_str();
  fitc->add_option("--neighbors", fit.neighbors, "kernel neighbours per point")->capture_default_str();
  fitc->add_option("--D", fit.D, "use this diffusion coefficient instead of calibrating");
  fitc->add_option("--seed", fit.seed, "eigensolver start-vector seed")->capture_default_str();

  ForecastArgs fc;
  auto* forecast = app.add_subcommand("forecast", "forecast moments from an initial density");
  forecast->add_option("-m,--model", fc.model)->required()->check(CLI::ExistingFile);
  forecast->add_option("-o,--output", fc.output)->required();
  forecast->add_option("--times", fc.times, "list a,b,c or range start:step:stop")->capture_default_str();
  forecast->add_option("--initial", fc.initial.kind, "equilibrium | gamma | gaussian")->capture_default_str();
  forecast->add_option("--mean", fc.initial.mean, "gaussian mean")->capture_default_str();
  forecast->add_option("--variance", fc.initial.variance, "gaussian variance")->capture_default_str();
  forecast->add_option("--coordinate", fc.coordinate)->capture_default_str();
  forecast->add_option("--power", fc.powers, "extra observables x^r");
  forecast->add_option("--snapshots", fc.snapshots_dir, "directory for density frames");
  forecast->add_option("--snapshot-times", fc.snapshot_times, "frame times");

  FilterArgs fl;
  auto* filter = app.add_subcommand("filter", "nonlinear filter on discrete observations");
  filter->add_option("-m,--model", fl.model)->required()->check(CLI::ExistingFile);
  filter->add_option("--observations", fl.observations)->required()->check(CLI::ExistingFile);
  filter->add_option("-o,--output", fl.output)->required();
  filter->add_option("--observation-map", fl.h.kind, "linear | abs | shifted-square")->capture_default_str();
  filter->add_option("--shift", fl.h.shift)->capture_default_str();
  filter->add_option("--R", fl.R_o, "observation noise variance")->capture_default_str();
  filter->add_option("--initial", fl.initial.kind, "equilibrium | gamma | gaussian")->capture_default_str();
  filter->add_option("--mean", fl.initial.mean)->capture_default_str();
  filter->add_option("--variance", fl.initial.variance)->capture_default_str();

  RespondArgs rs;
  auto* respond = app.add_subcommand("respond", "response of moments to a potential perturbation");
  respond->add_option("-m,--model", rs.model)->required()->check(CLI::ExistingFile);
  respond->add_option("-o,--output", rs.output)->required();
  respond->add_option("--times", rs.times)->capture_default_str();
  respond->add_option("--delta-u", rs.du.kind, "zero | quadratic | gaussian-well")->capture_default_str();
  respond->add_option("--a", rs.du.a)->capture_default_str();
  respond->add_option("--b", rs.du.b)->capture_default_str();
  respond->add_option("--amplitude", rs.du.amplitude)->capture_default_str();
  respond->add_option("--center", rs.du.center)->capture_default_str();
  respond->add_option("--width", rs.du.width)->capture_default_str();
  respond->add_option("--coordinate", rs.coordinate)->capture_default_str();
  respond->add_option("--M", rs.M, "modes of the perturbed model (default: as the model)");

  EstimateArgs ed;
  auto* estimate = app.add_subcommand("estimate-d", "estimate the diffusion coefficient");
  estimate->add_option("-m,--model", ed.model)->required()->check(CLI::ExistingFile);
  estimate->add_option("-i,--input", ed.input)->required()->check(CLI::ExistingFile);
  estimate->add_option("-o,--output", ed.output, "per-mode diagnostics CSV");
  estimate->add_option("--M", ed.M, "modes in the spectral sum (default: all)");
  estimate->add_flag("--update", ed.update, "store the estimate in the model artifact");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error[usage]: " << e.what() << "\n";
    return kUsageExit;
  }

  try {
    apply_thread_override();
    const std::string params = app.config_to_str(true, false);
    json p = json::object();
    p["config"] = params;
    if (*simulate) cmd_simulate(sim);
    else if (*fitc) cmd_fit(fit, p.dump());
    else if (*forecast) cmd_forecast(fc);
    else if (*filter) cmd_filter(fl);
    else if (*respond) cmd_respond(rs);
    else if (*estimate) cmd_estimate_d(ed);
  } catch (const Error& e) {
    std::cerr << "error[" << to_string(e.category()) << "]: " << e.what() << "\n";
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
