#include "rwl/cli.hpp"

#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "rwl/chaos_oracle.hpp"
#include "rwl/errors.hpp"
#include "rwl/estimator.hpp"
#include "rwl/gaussian_model.hpp"
#include "rwl/kernel_math.hpp"
#include "rwl/payoff_models.hpp"
#include "rwl/text_format.hpp"

namespace rwl::cli {

namespace {

using Json = nlohmann::ordered_json;

struct Params {
  double H = 0.25;
  double alpha = 0.0;
  std::string n_list = "8,16,32,64";
  std::string variant = "interior";
  std::string method = "substituted";
  std::string b_list = "0,0.5,1";
  long N = 8;
  std::string sigma = "linear";
  std::string f = "poly:0,0,1";
  double a = 1.0;
  long paths = 100000;
  long batch_size = 10000;
  long ref_factor = 8;
  std::uint64_t seed = 1;
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  int max_subdivisions = 2000;
  std::string in;
  std::string out;
  std::string format = "csv";
  std::string config;

  QuadratureSpec quadrature() const {
    QuadratureSpec q;
    q.rel_tol = rel_tol;
    q.abs_tol = abs_tol;
    q.max_subdivisions = max_subdivisions;
    q.validate();
    return q;
  }
};

// A result table plus optional fit, rendered as CSV or JSON.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> trailer;  // extra "# ..." lines for CSV
  Json extra = Json::object();       // extra keys for JSON
};

std::vector<long> parse_n_list(const std::string& text) {
  std::vector<long> ns;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) ns.push_back(parse_long(item, "n"));
  if (ns.empty()) throw ConfigError("n list must not be empty");
  for (std::size_t k = 0; k < ns.size(); ++k) {
    if (ns[k] < 1) throw ConfigError("n list entries must be >= 1");
    if (k > 0 && ns[k] <= ns[k - 1]) throw ConfigError("n list must be strictly increasing");
  }
  return ns;
}

std::vector<double> parse_real_list(const std::string& text, const char* what) {
  std::vector<double> xs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) xs.push_back(parse_double(item, what));
  if (xs.empty()) throw ConfigError(std::string(what) + " list must not be empty");
  return xs;
}

std::string cell(double x) { return format_double(x); }
std::string cell(long x) { return std::to_string(x); }

Json fit_json(const RateFitReport& fit) {
  Json excluded = Json::array();
  for (const auto& e : fit.points_excluded) excluded.push_back({{"n", e.n}, {"reason", e.reason}});
  return {{"slope", fit.slope},
          {"intercept", fit.intercept},
          {"r_squared", fit.r_squared},
          {"points_used", fit.points_used},
          {"points_excluded", excluded}};
}

std::string fit_line(const std::string& label, const RateFitReport& fit) {
  std::string line = "# fit" + label + ": slope=" + cell(fit.slope) +
                     ",intercept=" + cell(fit.intercept) + ",r_squared=" + cell(fit.r_squared);
  if (!fit.points_excluded.empty()) {
    line += ",excluded=";
    for (std::size_t k = 0; k < fit.points_excluded.size(); ++k) {
      if (k > 0) line += ";";
      line += std::to_string(fit.points_excluded[k].n) + ":" + fit.points_excluded[k].reason;
    }
  }
  return line;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

void write_table(const Table& table, const std::string& subcommand, const Json& echo,
                 const Params& p, std::ostream& fallback) {
  std::ofstream file;
  if (!p.out.empty()) {
    file.open(p.out);
    if (!file) throw ConfigError("cannot open output file '" + p.out + "'");
  }
  std::ostream& os = p.out.empty() ? fallback : file;

  if (p.format == "json") {
    Json doc;
    doc["format"] = "rough-weak-lab v1";
    doc["subcommand"] = subcommand;
    doc["generated_at"] = utc_timestamp();
    doc["config"] = echo;
    doc["columns"] = table.columns;
    Json rows = Json::array();
    for (const auto& r : table.rows) {
      Json obj = Json::object();
      for (std::size_t k = 0; k < r.size(); ++k) {
        // Numbers stay numbers; labels and blanks stay strings.
        const std::string& v = r[k];
        const char* end = v.data() + v.size();
        long i = 0;
        double x = 0.0;
        const auto as_int = std::from_chars(v.data(), end, i);
        const auto as_real = std::from_chars(v.data(), end, x);
        if (!v.empty() && as_int.ec == std::errc() && as_int.ptr == end) {
          obj[table.columns[k]] = i;
        } else if (!v.empty() && as_real.ec == std::errc() && as_real.ptr == end) {
          obj[table.columns[k]] = x;
        } else if (v.empty()) {
          obj[table.columns[k]] = nullptr;
        } else {
          obj[table.columns[k]] = v;
        }
      }
      rows.push_back(obj);
    }
    doc["rows"] = rows;
    for (const auto& [key, value] : table.extra.items()) doc[key] = value;
    os << doc.dump(2) << "\n";
    return;
  }

  os << kCsvVersionLine << "\n";
  os << "# config: " << echo.dump() << "\n";
  for (std::size_t k = 0; k < table.columns.size(); ++k) {
    os << (k ? "," : "") << table.columns[k];
  }
  os << "\n";
  for (const auto& r : table.rows) {
    for (std::size_t k = 0; k < r.size(); ++k) os << (k ? "," : "") << r[k];
    os << "\n";
  }
  for (const auto& line : table.trailer) os << line << "\n";
}

Json quadrature_echo(const Params& p) {
  return {{"rel_tol", p.rel_tol}, {"abs_tol", p.abs_tol}, {"max_subdivisions", p.max_subdivisions}};
}

// Each subcommand returns its table and config echo; a nonzero status is reported after
// the table has been written.
struct Outcome {
  Table table;
  Json echo;
  int status = kOk;
  std::string message;
};

Outcome run_lemma1(const Params& p) {
  const HurstParam H(p.H);
  const auto ns = parse_n_list(p.n_list);
  const auto q = p.quadrature();
  kernel::Lemma1Variant variant;
  if (p.variant == "interior") {
    variant = kernel::Lemma1Variant::interior;
  } else if (p.variant == "floor") {
    variant = kernel::Lemma1Variant::floor;
  } else {
    throw ConfigError("variant must be interior or floor");
  }
  std::vector<std::pair<std::string, kernel::IntegrationMethod>> methods;
  if (p.method == "direct" || p.method == "both") {
    methods.emplace_back("direct", kernel::IntegrationMethod::direct);
  }
  if (p.method == "substituted" || p.method == "both") {
    methods.emplace_back("substituted", kernel::IntegrationMethod::substituted);
  }
  if (methods.empty()) throw ConfigError("method must be direct, substituted or both");

  Outcome o;
  o.echo = {{"subcommand", "lemma1"}, {"H", p.H},           {"alpha", p.alpha},
            {"n", ns},                {"variant", p.variant}, {"method", p.method},
            {"quadrature", quadrature_echo(p)}};
  o.table.columns = {"alpha", "H", "n", "variant", "method", "value"};
  Json fits = Json::object();
  for (const auto& [name, method] : methods) {
    std::vector<double> values;
    for (long n : ns) {
      const double v = kernel::lemma1_integral(p.alpha, GridSize(n), H, variant, method, q);
      values.push_back(v);
      o.table.rows.push_back({cell(p.alpha), cell(p.H), cell(n), p.variant, name, cell(v)});
    }
    if (ns.size() >= 2) {
      const auto fit = fit_loglog(ns, values);
      o.table.trailer.push_back(fit_line("[" + name + "]", fit));
      fits[name] = fit_json(fit);
    }
  }
  o.table.trailer.push_back("# expected slope: " + cell(-(p.alpha + p.H + 0.5)));
  o.table.extra["fit"] = fits;
  o.table.extra["expected_slope"] = -(p.alpha + p.H + 0.5);
  return o;
}

Outcome run_gn(const Params& p) {
  const HurstParam H(p.H);
  const auto ns = parse_n_list(p.n_list);
  const auto bs = parse_real_list(p.b_list, "b");
  const auto q = p.quadrature();
  Outcome o;
  o.echo = {{"subcommand", "gn"}, {"H", p.H}, {"n", ns}, {"b", bs},
            {"quadrature", quadrature_echo(p)}};
  o.table.columns = {"n", "H", "b", "value", "mean_closed_form"};
  for (long n : ns) {
    const double mean = kernel::gn_mean(GridSize(n), H);
    for (double b : bs) {
      o.table.rows.push_back(
          {cell(n), cell(p.H), cell(b), cell(kernel::gn(b, GridSize(n), H, q)), cell(mean)});
    }
  }
  return o;
}

Outcome run_cov(const Params& p) {
  const HurstParam H(p.H);
  const JointGaussianModel model = build_model(GridSize(p.N), H, p.quadrature());
  Outcome o;
  o.echo = {{"subcommand", "cov"}, {"H", p.H}, {"N", p.N}, {"quadrature", quadrature_echo(p)}};
  o.table.columns = {"row", "col", "value"};
  for (long r = 0; r < model.dimension(); ++r) {
    for (long c = 0; c < model.dimension(); ++c) {
      o.table.rows.push_back({cell(r), cell(c), cell(model.cov(r, c))});
    }
  }
  o.table.trailer.push_back("# ordering: dW_0..dW_{N-1}, Y_{t_1}..Y_{t_{N-1}}; jitter=" +
                            cell(model.jitter));
  o.table.extra["jitter"] = model.jitter;
  return o;
}

Outcome run_weak_error(const Params& p) {
  ExperimentConfig config;
  config.H = HurstParam(p.H);
  config.sigma = parse_vol_function(p.sigma);
  config.f = parse_test_function(p.f);
  config.a = p.a;
  config.n_list = parse_n_list(p.n_list);
  config.ref_factor = p.ref_factor;
  config.paths = p.paths;
  config.batch_size = std::min(p.batch_size, p.paths);
  config.seed = p.seed;
  config.threads = p.threads;
  config.quadrature = p.quadrature();

  Outcome o;
  o.echo = {{"subcommand", "weak-error"},  {"H", p.H},
            {"sigma", config.sigma.label}, {"f", config.f.label()},
            {"a", p.a},                    {"n", config.n_list},
            {"ref_factor", p.ref_factor},  {"paths", p.paths},
            {"batch_size", config.batch_size}, {"seed", p.seed},
            {"quadrature", quadrature_echo(p)}};
  const auto estimates = estimate_weak_error(config);
  o.table.columns = {"n", "estimate", "stderr", "paths", "reference_N", "seed"};
  for (const auto& e : estimates) {
    o.table.rows.push_back({cell(e.n), cell(e.estimate), cell(e.stderr_), cell(e.paths),
                            cell(e.reference_N), std::to_string(e.seed)});
  }
  if (estimates.size() >= 2) {
    try {
      const auto fit = fit_rate(estimates);
      o.table.trailer.push_back(fit_line("", fit));
      o.table.extra["fit"] = fit_json(fit);
    } catch (const StatisticalError& e) {
      o.table.trailer.push_back(std::string("# fit: unavailable (") + e.what() + ")");
      o.table.extra["fit"] = nullptr;
    }
  }
  return o;
}

Outcome run_oracle(const Params& p) {
  const HurstParam H(p.H);
  const auto ns = parse_n_list(p.n_list);
  const TestFunction f = parse_test_function(p.f);
  if (!f.is_polynomial()) throw ConfigError("oracle needs a polynomial test function");
  const auto q = p.quadrature();
  const bool is_square = f.coefficients == std::vector<double>{0.0, 0.0, 1.0};

  Outcome o;
  o.echo = {{"subcommand", "oracle"}, {"H", p.H}, {"f", f.label()}, {"n", ns},
            {"quadrature", quadrature_echo(p)}};
  o.table.columns = {"n", "E_f", "kappa2", "closed_form", "beta"};
  for (long n : ns) {
    const GridSize grid(n);
    const double e_f = oracle::expected_f(grid, H, f, q);
    double kappa2 = 0.0;
    if (n >= 2) kappa2 = oracle::cumulants(oracle::build_quadratic_form(grid, H, q), 2)[1];
    std::string beta;
    try {
      beta = cell(oracle::oracle_rate(f, H, grid, q).beta);
    } catch (const StatisticalError& e) {
      o.status = kStatisticalError;
      o.message = "n=" + std::to_string(n) + ": " + e.what();
    }
    o.table.rows.push_back({cell(n), cell(e_f), cell(kappa2),
                            is_square ? cell(oracle::exact_weak_error_x2(grid, H)) : "", beta});
  }
  o.table.trailer.push_back("# beta = log2((E_n - E_2n) / (E_2n - E_4n))");
  return o;
}

std::vector<WeakErrorEstimate> read_estimates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open input file '" + path + "'");
  std::string line;
  std::vector<std::string> header;
  std::vector<WeakErrorEstimate> out;
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(item);
    return parts;
  };
  std::map<std::string, std::size_t> col;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto parts = split(line);
    if (col.empty()) {
      for (std::size_t k = 0; k < parts.size(); ++k) col[parts[k]] = k;
      for (const char* need : {"n", "estimate", "stderr"}) {
        if (!col.count(need)) throw ConfigError(std::string("input lacks column '") + need + "'");
      }
      continue;
    }
    if (parts.size() < col.size()) throw ConfigError("short row in '" + path + "': " + line);
    WeakErrorEstimate e;
    e.n = parse_long(parts[col["n"]], "n");
    e.estimate = parse_double(parts[col["estimate"]], "estimate");
    e.stderr_ = parse_double(parts[col["stderr"]], "stderr");
    if (col.count("paths")) e.paths = parse_long(parts[col["paths"]], "paths");
    out.push_back(e);
  }
  return out;
}

Outcome run_rate(const Params& p) {
  if (p.in.empty()) throw ConfigError("rate needs --in with a weak-error CSV file");
  const auto estimates = read_estimates(p.in);
  Outcome o;
  o.echo = {{"subcommand", "rate"}, {"in", p.in}};
  const auto fit = fit_rate(estimates);
  std::string excluded;
  for (std::size_t k = 0; k < fit.points_excluded.size(); ++k) {
    if (k > 0) excluded += ";";
    excluded += std::to_string(fit.points_excluded[k].n) + ":" + fit.points_excluded[k].reason;
  }
  o.table.columns = {"slope", "intercept", "r_squared", "excluded"};
  o.table.rows.push_back({cell(fit.slope), cell(fit.intercept), cell(fit.r_squared), excluded});
  o.table.extra["fit"] = fit_json(fit);
  return o;
}

// Values from --config fill every option not given on the command line.
void apply_config_file(CLI::App& sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  Json doc;
  try {
    in >> doc;
  } catch (const Json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");
  for (const auto& [key, value] : doc.items()) {
    CLI::Option* opt = nullptr;
    try {
      opt = sub.get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
      throw ConfigError("config key '" + key + "' is not an option of " + sub.get_name());
    }
    if (opt->count() > 0 || key == "config") continue;
    std::string text;
    if (value.is_string()) {
      text = value.get<std::string>();
    } else if (value.is_array()) {
      for (std::size_t k = 0; k < value.size(); ++k) {
        if (k > 0) text += ",";
        text += value[k].is_string() ? value[k].get<std::string>() : value[k].dump();
      }
    } else {
      text = value.dump();
    }
    opt->add_result(text);
    opt->run_callback();
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Params p;
  CLI::App app{"Weak-error laboratory for discretized rough volatility integrals",
               "rough-weak-lab"};
  app.require_subcommand(1);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", p.out, "Output path (default stdout)");
    sub->add_option("--format", p.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--config", p.config, "JSON file with option values (flags take precedence)");
    sub->add_option("--threads", p.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--rel-tol", p.rel_tol, "Quadrature relative tolerance");
    sub->add_option("--abs-tol", p.abs_tol, "Quadrature absolute tolerance");
    sub->add_option("--max-subdivisions", p.max_subdivisions, "Quadrature subdivision cap");
  };

  auto* lemma1 = app.add_subcommand("lemma1", "Kernel error integrals and their decay in n");
  lemma1->add_option("--H", p.H, "Hurst index");
  lemma1->add_option("--alpha", p.alpha, "Weight exponent");
  lemma1->add_option("--n", p.n_list, "Comma-separated, increasing grid sizes");
  lemma1->add_option("--variant", p.variant, "interior or floor");
  lemma1->add_option("--method", p.method, "direct, substituted or both");
  common(lemma1);

  auto* gn = app.add_subcommand("gn", "g_n(b) and its closed-form b-average");
  gn->add_option("--H", p.H, "Hurst index");
  gn->add_option("--n", p.n_list, "Comma-separated, increasing grid sizes");
  gn->add_option("--b", p.b_list, "Comma-separated b values in [0,1]");
  common(gn);

  auto* cov = app.add_subcommand("cov", "Dump the joint covariance matrix");
  cov->add_option("--H", p.H, "Hurst index");
  cov->add_option("--N", p.N, "Grid size");
  common(cov);

  auto* weak = app.add_subcommand("weak-error", "Coupled Monte Carlo weak-error estimates");
  weak->add_option("--H", p.H, "Hurst index");
  weak->add_option("--sigma", p.sigma, "linear | rbergomi:eta=..,v0=..,conv=tH|t2H");
  weak->add_option("--f", p.f, "poly:c0,c1,... | scall:K,delta");
  weak->add_option("--a", p.a, "Interpolation weight in [0,1]");
  weak->add_option("--n", p.n_list, "Comma-separated, increasing grid sizes");
  weak->add_option("--paths", p.paths, "Number of Monte Carlo paths");
  weak->add_option("--batch-size", p.batch_size, "Paths per batch");
  weak->add_option("--ref-factor", p.ref_factor, "Reference grid N = ref-factor * max(n)");
  weak->add_option("--seed", p.seed, "Base seed");
  common(weak);

  auto* orc = app.add_subcommand("oracle", "Exact moments for linear sigma and polynomial f");
  orc->add_option("--H", p.H, "Hurst index");
  orc->add_option("--f", p.f, "poly:c0,c1,...");
  orc->add_option("--n", p.n_list, "Comma-separated, increasing grid sizes");
  common(orc);

  auto* rate = app.add_subcommand("rate", "Fit a log-log rate to a weak-error CSV");
  rate->add_option("--in", p.in, "weak-error CSV file");
  common(rate);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "ERROR:" << kConfigError << ":" << e.what() << "\n";
    return kConfigError;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (!p.config.empty()) apply_config_file(*sub, p.config);
    const std::string name = sub->get_name();
    static const std::map<std::string, std::function<Outcome(const Params&)>> handlers{
        {"lemma1", run_lemma1}, {"gn", run_gn},         {"cov", run_cov},
        {"weak-error", run_weak_error}, {"oracle", run_oracle}, {"rate", run_rate}};
    const Outcome o = handlers.at(name)(p);
    write_table(o.table, name, o.echo, p, out);
    if (o.status != kOk) err << "ERROR:" << o.status << ":" << o.message << "\n";
    return o.status;
  } catch (const StatisticalError& e) {
    err << "ERROR:" << kStatisticalError << ":" << e.what() << "\n";
    return kStatisticalError;
  } catch (const NumericalError& e) {
    err << "ERROR:" << kNumericalError << ":" << e.what() << "\n";
    return kNumericalError;
  } catch (const std::logic_error& e) {
    // ConfigError, domain and range errors.
    err << "ERROR:" << kConfigError << ":" << e.what() << "\n";
    return kConfigError;
  } catch (const CLI::Error& e) {
    err << "ERROR:" << kConfigError << ":" << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace rwl::cli
