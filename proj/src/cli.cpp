#include "quadland/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "quadland/errors.hpp"
#include "quadland/geometry.hpp"
#include "quadland/init.hpp"
#include "quadland/landscape.hpp"
#include "quadland/optimize.hpp"
#include "quadland/risk.hpp"
#include "quadland/rng.hpp"
#include "quadland/serialize.hpp"

namespace quadland::cli {

namespace {

constexpr int kSchemaVersion = 1;

const std::vector<std::string> kCommands = {"gd-run",           "barrier-scan",
                                            "init-check",       "geometry-check",
                                            "sample-complexity", "recovery",
                                            "spectrum"};

const std::map<std::string, std::string> kDescriptions = {
    {"gd-run", "gradient descent from an initialization, with barrier and stationarity certificates"},
    {"barrier-scan", "random rank-deficient sweep against the energy barrier"},
    {"init-check", "identity initialization vs the barrier over random teachers"},
    {"geometry-check", "span test of the data and the adversarial null interpolator"},
    {"sample-complexity", "span fraction at N* and N*-1 samples"},
    {"recovery", "least-squares recovery of the Gram discrepancy from labels"},
    {"spectrum", "Wishart spectrum of random teacher Grams"}};

std::string normalize_key(std::string key) {
  for (char& c : key)
    if (c == '_') c = '-';
  if (key == "N") return "n";
  return key;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  std::istringstream in(text);
  in >> value;
  if (in.fail() || !(in >> std::ws).eof()) {
    throw InvalidArgument("config: bad value '" + text + "' for " + key);
  }
  return value;
}

void set_field(ExperimentConfig& c, const std::string& raw_key, const std::string& value) {
  const std::string key = normalize_key(raw_key);
  if (key == "d") c.d = parse_number<long>(key, value);
  else if (key == "m") c.m = parse_number<long>(key, value);
  else if (key == "m-hat") c.m_hat = parse_number<long>(key, value);
  else if (key == "n") c.n = parse_number<long>(key, value);
  else if (key == "trials") c.trials = parse_number<long>(key, value);
  else if (key == "jobs") c.jobs = parse_number<unsigned>(key, value);
  else if (key == "dist") c.dist = value;
  else if (key == "teacher") c.teacher = value;
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "out") c.out_dir = value;
  else if (key == "init") c.init = value;
  else if (key == "scale") c.scale = value;
  else if (key == "objective") c.objective = value;
  else if (key == "step") c.step = value;
  else if (key == "eta") c.eta = parse_number<double>(key, value);
  else if (key == "grad-tol") c.grad_tol = parse_number<double>(key, value);
  else if (key == "max-iters") c.max_iters = parse_number<long>(key, value);
  else if (key == "record-every") c.record_every = parse_number<long>(key, value);
  else if (key == "design") c.design = value;
  else if (key == "data") c.data_path = value;
  else if (key == "student") c.student_path = value;
  else if (key == "delta") c.delta = parse_number<double>(key, value);
  else throw InvalidArgument("config: unknown key '" + raw_key + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

json config_json(const ExperimentConfig& c) {
  return {{"command", c.command},
          {"d", c.d},
          {"m", c.m},
          {"m_hat", c.m_hat},
          {"N", c.n},
          {"trials", c.trials},
          {"jobs", c.jobs},
          {"dist", c.dist},
          {"teacher", c.teacher},
          {"seed", c.seed},
          {"config", c.config_path},
          {"out", c.out_dir},
          {"init", c.init},
          {"scale", c.scale},
          {"objective", c.objective},
          {"step", c.step},
          {"eta", c.eta},
          {"grad_tol", c.grad_tol},
          {"max_iters", c.max_iters},
          {"record_every", c.record_every},
          {"design", c.design},
          {"data", c.data_path},
          {"student", c.student_path},
          {"delta", c.delta}};
}

void require_count(long value, const char* name) {
  if (value < 1) throw InvalidArgument(std::string(name) + " must be >= 1");
}

// Command defaults, then validation of every count and shape.
void resolve(ExperimentConfig& c) {
  const std::string& cmd = c.command;
  auto def = [](long& field, long value) {
    if (field == kUnset) field = value;
  };
  if (cmd == "gd-run") {
    def(c.d, 2);
    def(c.m, 4 * c.d * c.d);
    def(c.n, 5 * critical_sample_count(c.d));
    if (c.teacher.empty()) c.teacher = "conditioned(0.1)";
  } else if (cmd == "barrier-scan") {
    def(c.d, 3);
    def(c.m, 8);
    def(c.trials, 500);
  } else if (cmd == "init-check" || cmd == "spectrum") {
    def(c.d, 10);
    def(c.m, 4000);
    def(c.trials, cmd == "init-check" ? 100 : 1);
  } else if (cmd == "geometry-check") {
    def(c.d, 2);
    def(c.m, c.d);
    def(c.n, critical_sample_count(c.d));
    if (c.teacher.empty()) c.teacher = "identity";
  } else if (cmd == "sample-complexity") {
    def(c.d, 3);
    def(c.trials, 100);
  } else if (cmd == "recovery") {
    def(c.d, 3);
    def(c.m, 2 * c.d);
    def(c.n, 3 * critical_sample_count(c.d));
  }
  if (c.teacher.empty()) c.teacher = "gaussian";
  def(c.m, c.d);
  def(c.m_hat, c.m);
  def(c.n, 1);
  def(c.trials, 1);
  require_count(c.d, "d");
  require_count(c.m, "m");
  require_count(c.m_hat, "m-hat");
  require_count(c.n, "N");
  require_count(c.trials, "trials");
  require_count(c.jobs, "jobs");
  require_count(c.max_iters, "max-iters");
  require_count(c.record_every, "record-every");
  if (c.m < c.d) throw InvalidArgument("need m >= d");
  if (c.m_hat < c.d) throw InvalidArgument("need m-hat >= d");
  if (!(c.grad_tol > 0.0)) throw InvalidArgument("grad-tol must be positive");
  if (c.delta < 0.0) throw InvalidArgument("delta must be positive");
  Distribution::parse(c.dist);  // validate the tag early
}

TeacherModel make_teacher(const ExperimentConfig& c) {
  if (c.teacher == "identity") {
    Matrix w = Matrix::Zero(c.m, c.d);
    w.topRows(c.d) = Matrix::Identity(c.d, c.d);
    return TeacherModel(std::move(w));
  }
  return sample_teacher(c.teacher, c.m, c.d, derive_seed(c.seed, 0)).teacher;
}

Dataset make_dataset(const ExperimentConfig& c, const TeacherModel& teacher) {
  if (!c.data_path.empty()) {
    Dataset data = read_dataset_csv(c.data_path);
    if (data.dim() != c.d) {
      throw InvalidArgument("data file has d = " + std::to_string(data.dim()) +
                            ", expected " + std::to_string(c.d));
    }
    return data.labeled() ? data : label_dataset(data, teacher);
  }
  return label_dataset(sample_dataset(Distribution::parse(c.dist), c.n, c.d, derive_seed(c.seed, 1)),
                       teacher);
}

StepPolicy make_step(const ExperimentConfig& c) {
  if (c.step == "backtracking") return BacktrackingStep{};
  if (c.step == "fixed") return FixedStep{c.eta};
  if (c.step == "inverse" || c.step == "inverse-smoothness") return InverseSmoothnessStep{};
  throw InvalidArgument("unknown step policy '" + c.step + "'");
}

BarrierMode parse_objective(const std::string& text) {
  if (text == "empirical") return BarrierMode::empirical;
  if (text == "population") return BarrierMode::population;
  throw InvalidArgument("unknown objective '" + text + "'");
}

// Collects the stdout summary, per-record JSON lines and CSV matrices.
struct Output {
  json summary;
  std::vector<json> lines;
  std::vector<std::pair<std::string, Matrix>> matrices;
};

Output gd_run(const ExperimentConfig& c) {
  const TeacherModel teacher = make_teacher(c);
  const Dataset data = make_dataset(c, teacher);
  const Moments moments = moments_of(Distribution::parse(c.dist));
  StudentWeights init;
  if (c.init == "identity") {
    init = identity_init(c.m_hat, c.d, parse_init_scale(c.scale));
  } else if (c.init == "random") {
    init = StudentWeights(
        sample_teacher(Distribution::parse(c.dist), c.m_hat, c.d, derive_seed(c.seed, 2))
            .teacher.weights());
  } else {
    throw InvalidArgument("unknown init '" + c.init + "'");
  }
  GDConfig config;
  config.objective = parse_objective(c.objective);
  config.step = make_step(c);
  config.grad_tol = c.grad_tol;
  config.max_iters = c.max_iters;
  config.record_every = c.record_every;
  config.validate();

  const BarrierReport init_check =
      config.objective == BarrierMode::empirical
          ? check_init_below_barrier(init, teacher, moments, BarrierMode::empirical, data)
          : check_init_below_barrier(init, teacher, moments, BarrierMode::population);
  const Problem problem{teacher, data, moments};
  const Trajectory traj = gradient_descent(init, problem, config);
  const StationarityCertificate cert =
      config.objective == BarrierMode::empirical
          ? certify_stationary_global_empirical(traj.final_weights, teacher, data, c.grad_tol, 1e-6)
          : certify_stationary_global(traj.final_weights, teacher, moments, c.grad_tol, 1e-6);

  Output out;
  out.summary = {{"init_check", to_json(init_check)},
                 {"trajectory", trajectory_summary(traj)},
                 {"final_risk", traj.final_risk},
                 {"population_risk", population_risk_value(traj.final_weights, teacher, moments)},
                 {"gram_gap", cert.gram_gap},
                 {"sigma_min_teacher", sigma_min(teacher.weights())},
                 {"certificate", to_json(cert)},
                 {"verdict", to_string(cert.verdict)}};
  for (const auto& r : traj.records) out.lines.push_back(to_json(r));
  out.matrices.emplace_back("teacher.csv", teacher.weights());
  out.matrices.emplace_back("initial_weights.csv", init.weights);
  out.matrices.emplace_back("final_weights.csv", traj.final_weights.weights);
  return out;
}

Output barrier_scan(const ExperimentConfig& c) {
  const TeacherModel teacher = make_teacher(c);
  const Moments moments = moments_of(Distribution::parse(c.dist));
  const SweepResult sweep = rank_deficient_sweep(teacher, moments, static_cast<std::size_t>(c.trials),
                                                 derive_seed(c.seed, 3), c.jobs);
  const StudentWeights worst = worst_rank_deficient(teacher);
  const double sigma = sigma_min(teacher.weights());
  Output out;
  out.summary = {{"sweep", to_json(sweep, false)},
                 {"sigma_min_teacher", sigma},
                 {"sigma_min_fourth", sigma * sigma * sigma * sigma},
                 {"moments", to_json(moments)},
                 {"worst_rank_deficient_risk", population_risk_value(worst, teacher, moments)},
                 {"tightness_bound", tightness_bound(teacher, moments)}};
  for (const auto& t : sweep.trials) {
    out.lines.push_back(
        {{"index", t.index}, {"seed", t.seed}, {"rank", t.rank}, {"scale", t.scale}, {"risk", t.risk}});
  }
  out.matrices.emplace_back("teacher.csv", teacher.weights());
  out.matrices.emplace_back("worst_rank_deficient.csv", worst.weights);
  return out;
}

Output init_check(const ExperimentConfig& c) {
  const Distribution teacher_dist = Distribution::parse(c.teacher);
  const Moments moments = moments_of(Distribution::parse(c.dist));
  const InitSweep sweep = init_sweep(teacher_dist, moments, c.m, c.d, parse_init_scale(c.scale),
                                     static_cast<std::size_t>(c.trials), c.seed, c.jobs);
  Output out;
  out.summary = {{"sweep", to_json(sweep)}, {"semicircle_second_moment", semicircle_second_moment()}};
  for (const auto& t : sweep.trials) out.lines.push_back(to_json(t));
  return out;
}

Output spectrum(const ExperimentConfig& c) {
  Output out;
  for (long t = 0; t < c.trials; ++t) {
    const TeacherModel teacher =
        sample_teacher(c.teacher, c.m, c.d, derive_seed(c.seed, static_cast<std::uint64_t>(t))).teacher;
    json line = to_json(wishart_spectrum_report(teacher));
    line["index"] = t;
    if (t == 0) out.summary = {{"spectrum", line}};
    out.lines.push_back(std::move(line));
  }
  out.summary["semicircle_second_moment"] = semicircle_second_moment();
  out.summary["trials"] = c.trials;
  return out;
}

Output geometry_check(const ExperimentConfig& c) {
  const TeacherModel teacher = make_teacher(c);
  Output out;
  Dataset data;
  if (c.design == "prime") {
    const PrimeSpanCertificate cert = prime_vandermonde_certificate(c.d, c.n);
    out.summary["prime_certificate"] = to_json(cert);
    data = label_dataset(prime_vandermonde_data(c.d, c.n), teacher);
  } else if (c.design == "random") {
    data = make_dataset(c, teacher);
  } else {
    throw InvalidArgument("unknown design '" + c.design + "'");
  }
  const SpanReport span = spans_symmetric(data);
  out.summary["n_star"] = critical_sample_count(c.d);
  out.summary["N"] = data.size();
  out.summary["span"] = to_json(span);
  if (!span.spans) {
    const Moments moments = moments_of(Distribution::parse(c.dist));
    std::optional<double> delta;
    if (c.delta > 0.0) delta = c.delta;
    const NullInterpolatorResult null = null_interpolator(teacher, data, moments, c.m_hat, delta);
    out.summary["null_interpolator"] = to_json(null.certificate);
    out.summary["delta"] = null.delta;
    out.matrices.emplace_back("null_direction.csv", null.direction);
    out.matrices.emplace_back("null_interpolator.csv", null.student.weights);
  }
  out.matrices.emplace_back("design.csv", tensorize(data).xi);
  return out;
}

Output sample_complexity(const ExperimentConfig& c) {
  const SampleComplexityResult r = sample_complexity_scan(
      Distribution::parse(c.dist), c.d, static_cast<std::size_t>(c.trials), c.seed, c.jobs);
  Output out;
  out.summary = to_json(r);
  for (std::size_t t = 0; t < r.at_n_star.size(); ++t) {
    out.lines.push_back({{"index", t},
                         {"at_n_star", to_json(r.at_n_star[t])},
                         {"below", to_json(r.below[t])}});
  }
  return out;
}

Output recovery(const ExperimentConfig& c) {
  const TeacherModel teacher = make_teacher(c);
  const Dataset data = make_dataset(c, teacher);
  StudentWeights student;
  if (!c.student_path.empty()) {
    student = StudentWeights(read_matrix_csv(c.student_path));
    if (student.dim() != c.d) throw InvalidArgument("student file has the wrong number of columns");
  } else {
    student = StudentWeights(
        sample_teacher(Distribution::parse(c.dist), c.m_hat, c.d, derive_seed(c.seed, 2))
            .teacher.weights());
  }
  const Matrix truth = gram(student.weights) - teacher_gram(teacher);
  const GramRecovery rec = recover_gram_discrepancy(data, student, teacher);
  const Matrix half_gram = 0.5 * (gram(student.weights) + teacher_gram(teacher));
  const GramRecovery half =
      recover_gram_discrepancy(data, embed_gram(half_gram, student.width()), teacher);
  Output out;
  out.summary = {{"N", data.size()},
                 {"span", to_json(spans_symmetric(data))},
                 {"true_norm", truth.norm()},
                 {"recovered_norm", rec.m_hat.norm()},
                 {"error", (rec.m_hat - truth).norm()},
                 {"residual_norm", rec.residual_norm},
                 {"half_ratio", half.m_hat.norm() / rec.m_hat.norm()}};
  out.matrices.emplace_back("m_hat.csv", rec.m_hat);
  out.matrices.emplace_back("true_discrepancy.csv", truth);
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_artifacts(const ExperimentConfig& c, const Output& o, const json& summary) {
  namespace fs = std::filesystem;
  const fs::path dir(c.out_dir);
  fs::create_directories(dir);
  json manifest = {{"schema_version", kSchemaVersion},
                   {"command", c.command},
                   {"config", config_json(c)},
                   {"artifacts", json::array()},
                   // Kept in its own block so the rest is reproducible byte for byte.
                   {"volatile", {{"created_at", utc_timestamp()}}}};
  {
    std::ofstream f(dir / "results.jsonl");
    f << summary.dump() << '\n';
    for (const auto& line : o.lines) f << line.dump() << '\n';
  }
  manifest["artifacts"].push_back("results.jsonl");
  for (const auto& [name, matrix] : o.matrices) {
    write_matrix_csv((dir / name).string(), matrix);
    manifest["artifacts"].push_back(name);
  }
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
}

Output dispatch(const ExperimentConfig& c) {
  if (c.command == "gd-run") return gd_run(c);
  if (c.command == "barrier-scan") return barrier_scan(c);
  if (c.command == "init-check") return init_check(c);
  if (c.command == "geometry-check") return geometry_check(c);
  if (c.command == "sample-complexity") return sample_complexity(c);
  if (c.command == "recovery") return recovery(c);
  return spectrum(c);
}

// The config file is located before the full parse so that explicit flags,
// which CLI11 writes afterwards, override it.
std::optional<std::string> find_config_flag(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

void add_options(CLI::App& sub, ExperimentConfig& c) {
  sub.add_option("--d", c.d, "input dimension");
  sub.add_option("--m", c.m, "teacher width");
  sub.add_option("--m-hat", c.m_hat, "student width");
  sub.add_option("--N,--n", c.n, "sample count");
  sub.add_option("--trials", c.trials, "independent trials");
  sub.add_option("--jobs", c.jobs, "worker threads");
  sub.add_option("--dist", c.dist, "data coordinate law: gaussian[(s)], uniform[(a)], rademacher");
  sub.add_option("--teacher", c.teacher, "teacher law, 'conditioned(s)' or 'identity'");
  sub.add_option("--seed", c.seed, "64-bit seed (fallback: QUADLAND_SEED)");
  sub.add_option("--config", c.config_path, "flat key = value config file");
  sub.add_option("--out", c.out_dir, "artifact directory");
  sub.add_option("--init", c.init, "identity | random");
  sub.add_option("--scale", c.scale, "identity scale: m | m_plus_4d");
  sub.add_option("--objective", c.objective, "empirical | population");
  sub.add_option("--step", c.step, "backtracking | fixed | inverse");
  sub.add_option("--eta", c.eta, "fixed step size");
  sub.add_option("--grad-tol", c.grad_tol, "stationarity tolerance");
  sub.add_option("--max-iters", c.max_iters, "iteration cap");
  sub.add_option("--record-every", c.record_every, "trajectory recording stride");
  sub.add_option("--design", c.design, "random | prime");
  sub.add_option("--data", c.data_path, "dataset CSV");
  sub.add_option("--student", c.student_path, "student weights CSV");
  sub.add_option("--delta", c.delta, "null-interpolator perturbation size");
}

}  // namespace

void apply_config_file(const std::string& path, ExperimentConfig& config) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key = value");
    }
    set_field(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  ExperimentConfig config;
  if (const char* env = std::getenv("QUADLAND_SEED")) {
    try {
      config.seed = parse_number<std::uint64_t>("QUADLAND_SEED", env);
    } catch (const InvalidArgument& e) {
      err << "error: " << e.what() << '\n';
      return 2;
    }
  }

  CLI::App app{"Teacher-student experiments for quadratic-activation networks", "quadland"};
  app.require_subcommand(1);
  std::map<std::string, CLI::App*> subs;
  for (const auto& name : kCommands) {
    subs[name] = app.add_subcommand(name, kDescriptions.at(name));
    add_options(*subs[name], config);
  }

  try {
    if (const auto path = find_config_flag(args)) apply_config_file(*path, config);
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  for (const auto& [name, sub] : subs) {
    if (sub->parsed()) config.command = name;
  }

  try {
    resolve(config);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    Output result = dispatch(config);
    json summary = {{"schema_version", kSchemaVersion}, {"command", config.command}};
    summary["config"] = config_json(config);
    for (auto& [k, v] : result.summary.items()) summary[k] = v;
    if (!config.out_dir.empty()) write_artifacts(config, result, summary);
    out << summary.dump() << '\n';
    return 0;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const DegenerateDistribution& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return 1;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace quadland::cli
