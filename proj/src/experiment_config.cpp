#include "roughvol/experiment_config.hpp"

#include <climits>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace roughvol {

const char* to_string(ExperimentKind kind) noexcept
{
  switch (kind) {
  case ExperimentKind::skew_ratio: return "skew-ratio";
  case ExperimentKind::sabr_curvature: return "sabr-curvature";
  case ExperimentKind::power_law: return "power-law";
  }
  return "unknown";
}

const char* to_string(OutputFormat format) noexcept
{
  return format == OutputFormat::csv ? "csv" : "csv+svg";
}

std::optional<ExperimentKind> parse_experiment(const std::string& name)
{
  for (auto k : {ExperimentKind::skew_ratio, ExperimentKind::sabr_curvature, ExperimentKind::power_law})
    if (name == to_string(k))
      return k;
  return std::nullopt;
}

std::optional<OutputFormat> parse_format(const std::string& name)
{
  if (name == "csv")
    return OutputFormat::csv;
  if (name == "csv+svg")
    return OutputFormat::csv_svg;
  return std::nullopt;
}

std::vector<double> geometric_ladder(const LadderSpec& spec)
{
  if (!(spec.t_min > 0.0) || !(spec.t_max > spec.t_min) || spec.points < 2)
    throw std::invalid_argument("ladder needs 0 < t_min < t_max and at least two points");
  std::vector<double> out(static_cast<std::size_t>(spec.points));
  const double step = std::log(spec.t_max / spec.t_min) / (spec.points - 1);
  for (int i = 0; i < spec.points; ++i)
    out[static_cast<std::size_t>(i)] = spec.t_min * std::exp(step * i);
  out.front() = spec.t_min;
  out.back() = spec.t_max;
  return out;
}

std::vector<double> ExperimentConfig::ladder_points() const
{
  return maturities.empty() ? geometric_ladder(ladder) : maturities;
}

namespace {

void collect(std::vector<std::string>& out, const std::function<void()>& check)
{
  try {
    check();
  } catch (const std::exception& e) {
    out.emplace_back(e.what());
  }
}

}  // namespace

std::vector<std::string> ExperimentConfig::problems() const
{
  std::vector<std::string> out;
  collect(out, [&] { model.validate(); });
  collect(out, [&] { sabr.validate(); });
  if (maturities.empty()) {
    collect(out, [&] { geometric_ladder(ladder); });
  } else {
    for (std::size_t i = 0; i < maturities.size(); ++i) {
      if (!(maturities[i] > 0.0)) {
        out.emplace_back("maturities must be positive");
        break;
      }
      if (i > 0 && !(maturities[i] > maturities[i - 1])) {
        out.emplace_back("maturities must be strictly increasing");
        break;
      }
    }
  }
  if (experiment != ExperimentKind::sabr_curvature) {
    if (std::abs(model.rho) >= 1.0)
      out.emplace_back("rough Bergomi experiments need |rho| < 1");
    if (n_paths < 2)
      out.emplace_back("paths must be at least 2");
    if (n_steps < 1 || n_steps > kMaxGridSteps)
      out.emplace_back("steps must lie in [1, " + std::to_string(kMaxGridSteps) + "]");
  }
  if (!(skew_bump > 0.0 && skew_bump < 0.5))
    out.emplace_back("bumps.skew must lie in (0, 0.5)");
  if (!(curvature_bump > 0.0 && curvature_bump < 0.5))
    out.emplace_back("bumps.curvature must lie in (0, 0.5)");
  if (!(fit_window.t_max > fit_window.t_min) || fit_window.t_min < 0.0)
    out.emplace_back("fit window needs 0 <= t_min < t_max");
  if (!(level_window_max > 0.0))
    out.emplace_back("fit.level_t_max must be positive");
  if (!(flag_threshold >= 0.0 && flag_threshold <= 1.0))
    out.emplace_back("flag_threshold must lie in [0, 1]");
  if (out_dir.empty())
    out.emplace_back("output directory must not be empty");
  return out;
}

ExperimentConfig default_config(ExperimentKind kind)
{
  ExperimentConfig c;
  c.experiment = kind;
  switch (kind) {
  case ExperimentKind::skew_ratio:
    c.model.hurst = 0.5;
    break;
  case ExperimentKind::power_law:
    c.model.hurst = 0.2;
    break;
  case ExperimentKind::sabr_curvature:
    c.ladder = {0.001, 1.0, 24};
    break;
  }
  return c;
}

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << "invalid configuration:";
        for (const auto& p : problems)
          os << "\n  - " << p;
        return os.str();
      }()),
      problems_(std::move(problems))
{
}

namespace {

using nlohmann::json;

class Reader {
public:
  explicit Reader(std::vector<std::string>& problems) : problems_(problems) {}

  // Reports keys of obj outside allowed.
  bool object(const json& obj, const std::string& where, std::initializer_list<const char*> allowed)
  {
    if (!obj.is_object()) {
      problems_.push_back(where + " must be an object");
      return false;
    }
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!ok.count(it.key()))
        problems_.push_back("unknown key '" + (where.empty() ? "" : where + ".") + it.key() + "'");
    return true;
  }

  void number(const json& obj, const char* key, const std::string& where, double& out)
  {
    if (!obj.contains(key))
      return;
    if (!obj[key].is_number())
      problems_.push_back(where + key + " must be a number");
    else
      out = obj[key].get<double>();
  }

  void integer(const json& obj, const char* key, const std::string& where, int& out)
  {
    if (!obj.contains(key))
      return;
    const auto& v = obj[key];
    if (!v.is_number_integer() || v.get<long long>() < INT32_MIN || v.get<long long>() > INT32_MAX)
      problems_.push_back(where + key + " must be an integer");
    else
      out = v.get<int>();
  }

  void unsigned64(const json& obj, const char* key, const std::string& where, std::uint64_t& out)
  {
    if (!obj.contains(key))
      return;
    const auto& v = obj[key];
    if (v.is_number_unsigned())
      out = v.get<std::uint64_t>();
    else if (v.is_number_integer() && v.get<long long>() >= 0)
      out = static_cast<std::uint64_t>(v.get<long long>());
    else
      problems_.push_back(where + key + " must be a non-negative integer");
  }

  void string(const json& obj, const char* key, const std::string& where, std::string& out)
  {
    if (!obj.contains(key))
      return;
    if (!obj[key].is_string())
      problems_.push_back(where + key + " must be a string");
    else
      out = obj[key].get<std::string>();
  }

private:
  std::vector<std::string>& problems_;
};

}  // namespace

ExperimentConfig apply_json(ExperimentConfig c, const json& doc)
{
  std::vector<std::string> problems;
  Reader r(problems);
  if (!r.object(doc, "", {"experiment", "model", "sabr", "ladder", "maturities", "paths", "steps", "seed",
                          "bumps", "fit", "flag_threshold", "output"}))
    throw ConfigError(problems);

  if (doc.contains("experiment")) {
    std::string name;
    r.string(doc, "experiment", "", name);
    if (auto k = parse_experiment(name))
      c.experiment = *k;
    else if (!name.empty())
      problems.push_back("unknown experiment '" + name + "'");
  }
  if (doc.contains("model") && r.object(doc["model"], "model", {"s0", "sigma0", "nu", "rho", "hurst"})) {
    const auto& m = doc["model"];
    r.number(m, "s0", "model.", c.model.s0);
    r.number(m, "sigma0", "model.", c.model.sigma0);
    r.number(m, "nu", "model.", c.model.nu);
    r.number(m, "rho", "model.", c.model.rho);
    r.number(m, "hurst", "model.", c.model.hurst);
  }
  if (doc.contains("sabr") && r.object(doc["sabr"], "sabr", {"alpha", "nu", "rho", "s0"})) {
    const auto& m = doc["sabr"];
    r.number(m, "alpha", "sabr.", c.sabr.alpha);
    r.number(m, "nu", "sabr.", c.sabr.nu);
    r.number(m, "rho", "sabr.", c.sabr.rho);
    r.number(m, "s0", "sabr.", c.sabr.s0);
  }
  if (doc.contains("ladder") && r.object(doc["ladder"], "ladder", {"t_min", "t_max", "points"})) {
    const auto& m = doc["ladder"];
    r.number(m, "t_min", "ladder.", c.ladder.t_min);
    r.number(m, "t_max", "ladder.", c.ladder.t_max);
    r.integer(m, "points", "ladder.", c.ladder.points);
  }
  if (doc.contains("maturities")) {
    const auto& m = doc["maturities"];
    if (!m.is_array()) {
      problems.emplace_back("maturities must be an array of numbers");
    } else {
      c.maturities.clear();
      for (const auto& v : m) {
        if (!v.is_number()) {
          problems.emplace_back("maturities must be an array of numbers");
          break;
        }
        c.maturities.push_back(v.get<double>());
      }
    }
  }
  r.integer(doc, "paths", "", c.n_paths);
  r.integer(doc, "steps", "", c.n_steps);
  r.unsigned64(doc, "seed", "", c.seed);
  if (doc.contains("bumps") && r.object(doc["bumps"], "bumps", {"skew", "curvature"})) {
    r.number(doc["bumps"], "skew", "bumps.", c.skew_bump);
    r.number(doc["bumps"], "curvature", "bumps.", c.curvature_bump);
  }
  if (doc.contains("fit") && r.object(doc["fit"], "fit", {"t_min", "t_max", "level_t_max"})) {
    r.number(doc["fit"], "t_min", "fit.", c.fit_window.t_min);
    r.number(doc["fit"], "t_max", "fit.", c.fit_window.t_max);
    r.number(doc["fit"], "level_t_max", "fit.", c.level_window_max);
  }
  r.number(doc, "flag_threshold", "", c.flag_threshold);
  if (doc.contains("output") && r.object(doc["output"], "output", {"dir", "format"})) {
    r.string(doc["output"], "dir", "output.", c.out_dir);
    std::string fmt;
    r.string(doc["output"], "format", "output.", fmt);
    if (!fmt.empty()) {
      if (auto f = parse_format(fmt))
        c.format = *f;
      else
        problems.push_back("output.format must be csv or csv+svg, got '" + fmt + "'");
    }
  }
  if (!problems.empty())
    throw ConfigError(problems);
  return c;
}

ExperimentConfig load_config_file(ExperimentConfig base, const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError({"cannot open config file '" + path + "'"});
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError({"config file '" + path + "' is not valid JSON: " + e.what()});
  }
  return apply_json(std::move(base), doc);
}

nlohmann::json to_json(const ExperimentConfig& c)
{
  json j;
  j["experiment"] = to_string(c.experiment);
  j["model"] = {{"s0", c.model.s0},
                {"sigma0", c.model.sigma0},
                {"nu", c.model.nu},
                {"rho", c.model.rho},
                {"hurst", c.model.hurst}};
  j["sabr"] = {{"alpha", c.sabr.alpha}, {"nu", c.sabr.nu}, {"rho", c.sabr.rho}, {"s0", c.sabr.s0}};
  j["ladder"] = {{"t_min", c.ladder.t_min}, {"t_max", c.ladder.t_max}, {"points", c.ladder.points}};
  j["maturities"] = c.maturities;
  j["paths"] = c.n_paths;
  j["steps"] = c.n_steps;
  j["seed"] = c.seed;
  j["bumps"] = {{"skew", c.skew_bump}, {"curvature", c.curvature_bump}};
  j["fit"] = {{"t_min", c.fit_window.t_min},
              {"t_max", c.fit_window.t_max},
              {"level_t_max", c.level_window_max}};
  j["flag_threshold"] = c.flag_threshold;
  j["output"] = {{"dir", c.out_dir}, {"format", to_string(c.format)}};
  return j;
}

}  // namespace roughvol
