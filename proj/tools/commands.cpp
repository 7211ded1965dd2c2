#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "corrlog/corrlog.hpp"

namespace corrlog::cli {
namespace {

struct RunConfig {
  std::string config;
  std::string in;
  std::string out;
  std::string diagnostics;
  std::string variance_out;

  std::string frame = "offlog";
  bool inverse = false;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> gamma;

  int degree = 6;
  std::size_t samples = 10;
  std::string degrees = "1-10";
  std::string samples_list = "4,6,8,10,15,20,30,50";
  double tie_tol = 1e-12;

  Index width = 600;
  Index offset = 1;
  std::string method = "two_pass";
  std::optional<Index> seam;
  bool exclude_seam = false;

  double diag_eps = 1e-12;
  int diag_max_iter = 10000;
  double scaling_tol = 1e-12;
  int scaling_max_iter = 100;

  Index n = 10;
  std::size_t length = 100;
  double smoothness = 1.0;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string kind = "sinusoid";
  int modes = 3;
  double spread = 0.8;

  ChartOptions chart() const {
    ChartOptions c;
    c.diag.eps = diag_eps;
    c.diag.max_iterations = diag_max_iter;
    c.scaling.tolerance = scaling_tol;
    c.scaling.max_iterations = scaling_max_iter;
    return c;
  }
};

const std::vector<std::string> kFrames{"offlog", "logscaling", "spd", "euclidean"};

class Timer {
 public:
  Timer(std::ostream& err, std::string label) : err_(err), label_(std::move(label)) {}
  ~Timer() {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start_;
    err_ << "time " << label_ << ": " << std::fixed << std::setprecision(3) << dt.count() << " s\n";
    err_.unsetf(std::ios::floatfield);
  }
  Timer(const Timer&) = delete;
  Timer& operator=(const Timer&) = delete;

 private:
  std::ostream& err_;
  std::string label_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// ---- option wiring -------------------------------------------------------

void add_config(CLI::App* sub, RunConfig& c) {
  sub->add_option("--config", c.config, "key = value file; command-line flags take precedence")
      ->check(CLI::ExistingFile);
}

void add_in(CLI::App* sub, RunConfig& c, const std::string& what) {
  sub->add_option("--in", c.in, what)->required()->check(CLI::ExistingFile);
}

void add_out(CLI::App* sub, RunConfig& c, const std::string& what) {
  sub->add_option("--out", c.out, what)->required();
}

void add_solver(CLI::App* sub, RunConfig& c) {
  sub->add_option("--diag-eps", c.diag_eps, "off-log diagonal solve tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--diag-max-iter", c.diag_max_iter, "off-log diagonal solve iteration cap")
      ->check(CLI::PositiveNumber);
  sub->add_option("--scaling-tol", c.scaling_tol, "log-scaling Newton gradient tolerance")
      ->check(CLI::PositiveNumber);
  sub->add_option("--scaling-max-iter", c.scaling_max_iter, "log-scaling Newton iteration cap")
      ->check(CLI::PositiveNumber);
}

void add_frame(CLI::App* sub, RunConfig& c) {
  sub->add_option("--frame", c.frame, "offlog | logscaling | spd | euclidean")
      ->check(CLI::IsMember(kFrames));
}

std::unique_ptr<CLI::App> build_app(RunConfig& c) {
  auto app = std::make_unique<CLI::App>("Flat geometries on correlation matrices and trajectory regression",
                                        "corrlog");
  app->require_subcommand(1, 1);
  app->fallthrough(false);

  auto* window = app->add_subcommand("window", "sliding-window Pearson correlation of a time-series CSV");
  add_config(window, c);
  add_in(window, c, "time-series CSV (header of region labels, one row per sample)");
  add_out(window, c, "output trajectory (.mtrj)");
  window->add_option("--width", c.width, "window length in samples");
  window->add_option("--offset", c.offset, "step between window starts");
  window->add_option("--method", c.method, "two_pass | rolling")
      ->check(CLI::IsMember({"two_pass", "rolling"}));
  window->add_option("--seam", c.seam, "first sample of a second concatenated run");
  window->add_flag("--exclude-seam", c.exclude_seam, "skip windows straddling --seam");

  auto* transform = app->add_subcommand("transform", "apply a frame's chart to every point");
  add_config(transform, c);
  add_in(transform, c, "input trajectory (.mtrj)");
  add_out(transform, c, "output trajectory (.mtrj)");
  add_frame(transform, c);
  transform->add_flag("--inverse", c.inverse, "map flat coordinates back to matrices");
  transform->add_option("--alpha", c.alpha, "form coefficient on the squared entries");
  transform->add_option("--beta", c.beta, "form coefficient on the row-sum term");
  transform->add_option("--gamma", c.gamma, "form coefficient on the total-sum term");
  add_solver(transform, c);

  auto* regress = app->add_subcommand("regress", "polynomial regression pulled back through a frame");
  add_config(regress, c);
  add_in(regress, c, "correlation trajectory (.mtrj)");
  add_out(regress, c, "fitted trajectory (.mtrj)");
  add_frame(regress, c);
  regress->add_option("--degree", c.degree, "polynomial degree")->check(CLI::NonNegativeNumber);
  regress->add_option("--samples", c.samples, "equispaced samples used for the fit")
      ->check(CLI::PositiveNumber);
  regress->add_option("--diagnostics", c.diagnostics, "diagnostics CSV path");
  add_solver(regress, c);

  auto* grid = app->add_subcommand("gridsearch", "MSE over a grid of degrees and sample counts");
  add_config(grid, c);
  add_in(grid, c, "correlation or flat trajectory (.mtrj)");
  add_out(grid, c, "grid CSV");
  add_frame(grid, c);
  grid->add_option("--degrees", c.degrees, "degree list, e.g. 1-10 or 1,2,5");
  grid->add_option("--samples-list", c.samples_list, "sample-count list, e.g. 4,6,8");
  grid->add_option("--tie-tol", c.tie_tol, "relative tie tolerance")->check(CLI::NonNegativeNumber);
  add_solver(grid, c);

  auto* pca = app->add_subcommand("pca", "three-component PCA of a vectorized trajectory");
  add_config(pca, c);
  add_in(pca, c, "trajectory (.mtrj)");
  add_out(pca, c, "coordinates CSV");
  pca->add_option("--variance-out", c.variance_out, "explained-variance CSV path");
  pca->add_option("--frame", c.frame, "flatten correlation input first: none | offlog | logscaling | spd | euclidean")
      ->check(CLI::IsMember({"none", "offlog", "logscaling", "spd", "euclidean"}));
  add_solver(pca, c);

  auto* synth = app->add_subcommand("synth", "synthetic smooth correlation trajectory");
  add_config(synth, c);
  add_out(synth, c, "output trajectory (.mtrj)");
  synth->add_option("--n", c.n, "matrix dimension");
  synth->add_option("--T", c.length, "number of time points");
  synth->add_option("--smoothness", c.smoothness, "amplitude of the slow variation")
      ->check(CLI::NonNegativeNumber);
  synth->add_option("--noise", c.noise, "per-point perturbation scale")->check(CLI::NonNegativeNumber);
  synth->add_option("--seed", c.seed, "random seed");
  synth->add_option("--kind", c.kind, "sinusoid | polynomial")
      ->check(CLI::IsMember({"sinusoid", "polynomial"}));
  synth->add_option("--degree", c.degree, "degree of the polynomial kind")->check(CLI::NonNegativeNumber);
  synth->add_option("--modes", c.modes, "number of sinusoidal modes")->check(CLI::PositiveNumber);
  synth->add_option("--spread", c.spread, "scale of the off-diagonal coordinates")
      ->check(CLI::NonNegativeNumber);
  add_solver(synth, c);

  return app;
}

// ---- config file ---------------------------------------------------------

std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("cannot open config '" + path + "'");
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line;
  for (std::size_t lineno = 1; std::getline(is, line); ++lineno) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string_view body = detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw InvalidArgument(path + " line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key(detail::trim(body.substr(0, eq)));
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string value(detail::trim(body.substr(eq + 1)));
    if (key.empty()) throw InvalidArgument(path + " line " + std::to_string(lineno) + ": empty key");
    pairs.emplace_back(std::move(key), value);
  }
  return pairs;
}

bool known_anywhere(const CLI::App& app, const std::string& flag) {
  for (const CLI::App* sub : app.get_subcommands({})) {
    if (sub->get_option_no_throw(flag) != nullptr) return true;
  }
  return false;
}

// Config entries become extra "--key=value" tokens for every option the user
// did not give on the command line. Keys for other commands are ignored so
// one file can drive a whole pipeline.
std::vector<std::string> config_tokens(const CLI::App& app, const CLI::App& sub, const std::string& path) {
  std::vector<std::string> tokens;
  for (const auto& [key, value] : read_config(path)) {
    if (key == "config") continue;
    const std::string flag = "--" + key;
    const CLI::Option* opt = sub.get_option_no_throw(flag);
    if (opt == nullptr) {
      if (!known_anywhere(app, flag)) throw InvalidArgument("unknown config key '" + key + "'");
      continue;
    }
    if (opt->count() == 0) tokens.push_back(flag + "=" + value);
  }
  return tokens;
}

void parse(CLI::App& app, const std::vector<std::string>& args) {
  std::vector<char*> argv;
  argv.reserve(args.size());
  for (const std::string& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  app.parse(static_cast<int>(argv.size()), argv.data());
}

// ---- helpers -------------------------------------------------------------

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> values;
  std::string_view rest(text);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = detail::trim(rest.substr(0, comma));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    if (item.empty()) continue;
    const auto dash = item.find('-', 1);
    const auto to_int = [&](std::string_view s) {
      s = detail::trim(s);
      int v = 0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw InvalidArgument(std::string(what) + ": cannot parse '" + std::string(s) + "'");
      }
      return v;
    };
    if (dash == std::string_view::npos) {
      values.push_back(to_int(item));
    } else {
      const int lo = to_int(item.substr(0, dash));
      const int hi = to_int(item.substr(dash + 1));
      if (hi < lo) throw InvalidArgument(std::string(what) + ": descending range '" + std::string(item) + "'");
      for (int v = lo; v <= hi; ++v) values.push_back(v);
    }
  }
  if (values.empty()) throw InvalidArgument(std::string(what) + ": empty list");
  return values;
}

FormCoefficients form_for(const RunConfig& c, Index n) {
  FormCoefficients f = detail::default_coefficients(n);
  if (c.alpha || c.beta || c.gamma) {
    f = FormCoefficients{c.alpha.value_or(0.0), c.beta.value_or(0.0), c.gamma.value_or(0.0)};
  }
  return f;
}

// Sum of metric lengths of consecutive chords in flat coordinates.
double path_length(const Trajectory& flat, const FormCoefficients& f) {
  const Index n = flat.dim();
  double total = 0.0;
  for (std::size_t i = 1; i < flat.size(); ++i) {
    const Matrix step = flat.value(i) - flat.value(i - 1);
    double sq = 0.0;
    switch (flat.tag()) {
      case SpaceTag::hollow: sq = HolQuadraticForm(f, n)(HollowMatrix(unchecked, step)); break;
      case SpaceTag::rowzero: sq = RowZeroQuadraticForm(f, n)(RowZeroMatrix(unchecked, step)); break;
      default: sq = step.squaredNorm(); break;
    }
    total += std::sqrt(std::max(sq, 0.0));
  }
  return total;
}

bool is_valid_correlation(const Matrix& m, double lambda_min) {
  return (m.diagonal().array() == 1.0).all() && lambda_min > 0.0;
}

// ---- commands ------------------------------------------------------------

int cmd_window(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const RegionTimeSeries ts = read_timeseries_csv(c.in);
  WindowOptions opt;
  opt.method = c.method == "rolling" ? PearsonMethod::rolling : PearsonMethod::two_pass;
  opt.seam = c.seam;
  opt.exclude_seam = c.exclude_seam;
  if (c.exclude_seam && !c.seam) throw InvalidArgument("--exclude-seam needs --seam");
  const WindowResult w = [&] {
    Timer t(err, "window");
    return sliding_window_correlation(ts, WindowSpec{c.width, c.offset}, opt);
  }();
  write_trajectory(c.out, w.trajectory);
  out << "regions: " << ts.n_regions() << "\n"
      << "samples: " << ts.n_samples() << "\n"
      << "windows: " << w.trajectory.size() << "\n"
      << "lambda_min: " << detail::format_double(*std::min_element(w.lambda_min.begin(), w.lambda_min.end()))
      << "\n"
      << "lambda_max: " << detail::format_double(*std::max_element(w.lambda_max.begin(), w.lambda_max.end()))
      << "\n"
      << "outside_guard: " << w.outside_guard << "\n";
  if (w.outside_guard > 0) {
    err << "warning: " << w.outside_guard << " windows have eigenvalues outside [1e-3, 1e3]\n";
  }
  return kSuccess;
}

int cmd_transform(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const Trajectory traj = read_trajectory(c.in);
  const Frame frame = parse_frame(c.frame);
  const ChartOptions chart = c.chart();
  const FormCoefficients form = form_for(c, traj.dim());
  // Validate the form up front so bad coefficients fail before any work.
  if (frame == Frame::offlog) HolQuadraticForm(form, traj.dim());
  if (frame == Frame::logscaling) RowZeroQuadraticForm(form, traj.dim());

  Trajectory result = traj;
  double length = 0.0;
  if (!c.inverse) {
    {
      Timer t(err, "transform forward");
      result = to_flat(traj, frame, chart);
    }
    length = path_length(result, form);
  } else {
    if (traj.tag() != flat_tag(frame)) {
      throw DataError("inverse " + std::string(to_string(frame)) + " transform needs a " +
                      std::string(to_string(flat_tag(frame))) + " trajectory, got " +
                      std::string(to_string(traj.tag())));
    }
    length = path_length(traj, form);
    std::vector<Matrix> values;
    values.reserve(traj.size());
    {
      Timer t(err, "transform inverse");
      for (const Matrix& z : traj.values()) values.push_back(from_flat_point(z, frame, chart));
    }
    SpaceTag tag = SpaceTag::correlation;
    if (frame == Frame::spd) tag = SpaceTag::spd;
    if (frame == Frame::euclidean) tag = SpaceTag::symmetric;
    result = Trajectory(traj.times(), std::move(values), tag);
  }
  write_trajectory(c.out, result);
  out << "points: " << traj.size() << "\n"
      << "dimension: " << traj.dim() << "\n"
      << "input: " << to_string(traj.tag()) << "\n"
      << "output: " << to_string(result.tag()) << "\n"
      << "path_length: " << detail::format_double(length) << "\n";
  return kSuccess;
}

int cmd_regress(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const Trajectory traj = read_trajectory(c.in);
  const Frame frame = parse_frame(c.frame);
  PullbackResult r = [&] {
    Timer t(err, "regress");
    return regress_pullback(traj, frame, c.degree, c.samples, c.chart());
  }();
  write_trajectory(c.out, r.fitted);
  if (!c.diagnostics.empty()) write_diagnostics_csv(c.diagnostics, r.diagnostics);

  std::size_t valid = 0;
  for (std::size_t i = 0; i < r.fitted.size(); ++i) {
    if (is_valid_correlation(r.fitted.value(i), r.diagnostics.min_eigenvalues[i])) ++valid;
  }
  const auto& lambdas = r.diagnostics.min_eigenvalues;
  out << "points: " << traj.size() << "\n"
      << "frame: " << to_string(frame) << "\n"
      << "degree: " << c.degree << "\n"
      << "samples: " << c.samples << "\n"
      << "valid_correlation: " << valid << "/" << r.fitted.size() << "\n"
      << "nonpositive_min_eigenvalue: " << r.diagnostics.nonpositive_count << "\n"
      << "lambda_min: " << detail::format_double(*std::min_element(lambdas.begin(), lambdas.end())) << "\n"
      << "flat_mse: " << detail::format_double(r.flat_mse) << "\n"
      << "manifold_mse: " << detail::format_double(r.manifold_mse) << "\n";
  if (frame == Frame::spd) {
    out << "max_deviation_percent: " << detail::format_double(r.diagnostics.max_relative_deviation) << "\n";
  }
  return kSuccess;
}

int cmd_gridsearch(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const std::vector<int> degrees = parse_int_list(c.degrees, "--degrees");
  std::vector<std::size_t> samples;
  for (int k : parse_int_list(c.samples_list, "--samples-list")) {
    if (k < 1) throw InvalidArgument("--samples-list: sample counts must be positive");
    samples.push_back(static_cast<std::size_t>(k));
  }
  for (int d : degrees) {
    if (d < 0) throw InvalidArgument("--degrees: degrees must be non-negative");
  }
  const Trajectory traj = read_trajectory(c.in);
  const Trajectory flat = is_flat(traj.tag()) ? traj : to_flat(traj, parse_frame(c.frame), c.chart());
  GridSearchOptions opt;
  opt.tie_tolerance = c.tie_tol;
  GridSearchResult g = [&] {
    Timer t(err, "gridsearch");
    return grid_search(flat, degrees, samples, opt);
  }();
  write_grid_csv(c.out, g);
  out << "cells: " << degrees.size() * samples.size() << "\n"
      << "best_degree: " << g.best_degree << "\n"
      << "best_samples: " << g.best_samples << "\n"
      << "tie_threshold: " << detail::format_double(g.tie_threshold) << "\n";
  if (!g.tie_break_note.empty()) out << "tie_break: " << g.tie_break_note << "\n";
  return kSuccess;
}

int cmd_pca(const RunConfig& c, std::ostream& out, std::ostream& err) {
  Trajectory traj = read_trajectory(c.in);
  if (c.frame != "none" && traj.tag() == SpaceTag::correlation) {
    traj = to_flat(traj, parse_frame(c.frame), c.chart());
  }
  const PcaResult p = [&] {
    Timer t(err, "pca");
    return pca3(traj);
  }();
  write_pca_csv(c.out, traj.times(), p);
  if (!c.variance_out.empty()) write_pca_variance_csv(c.variance_out, p);
  out << "points: " << traj.size() << "\n"
      << "space: " << to_string(traj.tag()) << "\n";
  for (Index i = 0; i < 3; ++i) {
    out << "pc" << i + 1 << ": " << detail::format_double(p.variance(i)) << " ("
        << detail::format_double(p.ratio(i)) << ")\n";
  }
  return kSuccess;
}

int cmd_synth(const RunConfig& c, std::ostream& out, std::ostream& err) {
  Trajectory traj = [&] {
    Timer t(err, "synth");
    if (c.kind == "polynomial") {
      if (c.n < 2 || c.length < 1) throw InvalidArgument("synth: need n >= 2 and T >= 1");
      return synthesize_polynomial_trajectory(c.n, c.length, c.degree, c.spread, c.seed);
    }
    SynthSpec spec;
    spec.n = c.n;
    spec.length = c.length;
    spec.smoothness = c.smoothness;
    spec.noise = c.noise;
    spec.seed = c.seed;
    spec.modes = c.modes;
    spec.spread = c.spread;
    return synthesize_trajectory(spec);
  }();
  write_trajectory(c.out, traj);
  out << "points: " << traj.size() << "\n"
      << "dimension: " << traj.dim() << "\n"
      << "kind: " << c.kind << "\n";
  return kSuccess;
}

int dispatch(const std::string& name, const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (name == "window") return cmd_window(c, out, err);
  if (name == "transform") return cmd_transform(c, out, err);
  if (name == "regress") return cmd_regress(c, out, err);
  if (name == "gridsearch") return cmd_gridsearch(c, out, err);
  if (name == "pca") return cmd_pca(c, out, err);
  return cmd_synth(c, out, err);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig config;
  std::unique_ptr<CLI::App> app = build_app(config);
  try {
    parse(*app, args);
    const CLI::App* sub = app->get_subcommands().front();
    if (!config.config.empty()) {
      std::vector<std::string> merged = args;
      const std::vector<std::string> extra = config_tokens(*app, *sub, config.config);
      merged.insert(merged.end(), extra.begin(), extra.end());
      config = RunConfig{};
      app = build_app(config);
      parse(*app, merged);
      sub = app->get_subcommands().front();
    }
    return dispatch(sub->get_name(), config, out, err);
  } catch (const CLI::ParseError& e) {
    const int code = app->exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kNumericalError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kNumericalError;
  }
}

}  // namespace corrlog::cli
