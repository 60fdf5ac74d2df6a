#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "hoskip/experiment.hpp"
#include "hoskip/version.hpp"
#include "json.hpp"

namespace hoskip {

namespace {

using SectionMap = std::map<std::string, std::map<std::string, std::string>>;

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

SectionMap parse_ini(std::istream& is) {
  SectionMap out;
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": malformed section header");
      section = lower(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": key outside any [section]");
    out[section][key] = value;
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(key + ": not a number: " + value);
  }
}

double parse_double_or_auto(const std::string& key, const std::string& value) {
  if (lower(value) == "auto") return -1.0;
  return parse_double(key, value);
}

long parse_long(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(key + ": not an integer: " + value);
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  const std::string v = lower(value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument(key + ": not a boolean: " + value);
}

// Comma list ("0,50,100") or range ("0:5:400").
std::vector<double> parse_number_list(const std::string& key,
                                      const std::string& value) {
  std::vector<double> out;
  const std::string v = trim(value);
  if (v.empty()) return out;
  if (v.find(':') != std::string::npos) {
    double lo, step, hi;
    if (std::sscanf(v.c_str(), "%lf:%lf:%lf", &lo, &step, &hi) != 3 ||
        !(step > 0.0))
      throw std::invalid_argument(key + ": malformed range: " + value);
    for (double x = lo; x <= hi + 1e-9; x += step) out.push_back(x);
    return out;
  }
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(parse_double(key, trim(item)));
  return out;
}

PolicyKind parse_kind(const std::string& key, const std::string& value) {
  const std::string v = lower(value);
  if (v == "best_connected" || v == "bc") return PolicyKind::BestConnected;
  if (v == "alternating" || v == "al") return PolicyKind::Alternating;
  if (v == "location_aware" || v == "la") return PolicyKind::LocationAware;
  if (v == "size_aware" || v == "sa") return PolicyKind::SizeAware;
  if (v == "hybrid" || v == "hb") return PolicyKind::Hybrid;
  throw std::invalid_argument(key + ": unknown policy kind: " + value);
}

// Default kind inferred from the first name token ("la_ic" -> location aware).
std::optional<PolicyKind> kind_from_name(const std::string& name) {
  const std::string head = lower(name.substr(0, name.find('_')));
  if (head == "bc") return PolicyKind::BestConnected;
  if (head == "al") return PolicyKind::Alternating;
  if (head == "la") return PolicyKind::LocationAware;
  if (head == "sa") return PolicyKind::SizeAware;
  if (head == "hb") return PolicyKind::Hybrid;
  return std::nullopt;
}

void set_scenario_key(ScenarioConfig& cfg, const std::string& section,
                      const std::string& key, const std::string& value) {
  const std::string full = section + "." + key;
  if (section == "scenario") {
    if (key == "name") cfg.name = value;
    else if (key == "replications")
      cfg.n_replications = static_cast<int>(parse_long(full, value));
    else if (key == "master_seed")
      cfg.master_seed = static_cast<std::uint64_t>(parse_long(full, value));
    else if (key == "rate_samples_per_rep")
      cfg.rate_samples_per_rep = static_cast<int>(parse_long(full, value));
    else if (key == "coverage_samples_per_rep")
      cfg.coverage_samples_per_rep = static_cast<int>(parse_long(full, value));
    else if (key == "area_probe_count")
      cfg.area_probe_count = static_cast<int>(parse_long(full, value));
    else if (key == "threads")
      cfg.threads = static_cast<int>(parse_long(full, value));
    else
      throw std::invalid_argument("unknown config key: " + full);
  } else if (section == "model") {
    if (key == "kind") {
      const std::string v = lower(value);
      if (v == "ppp") cfg.model.tag = ModelTag::Ppp;
      else if (v == "matern" || v == "matern_pcp" || v == "pcp")
        cfg.model.tag = ModelTag::MaternPcp;
      else
        throw std::invalid_argument(full + ": unknown model kind: " + value);
    } else if (key == "lambda") cfg.model.lambda = parse_double(full, value);
    else if (key == "power") cfg.model.power = parse_double(full, value);
    else if (key == "path_loss_exp")
      cfg.model.path_loss_exp = parse_double(full, value);
    else if (key == "lambda_p") cfg.model.pcp.lambda_p = parse_double(full, value);
    else if (key == "lambda_c") cfg.model.pcp.lambda_c = parse_double(full, value);
    else if (key == "radius") cfg.model.pcp.radius = parse_double(full, value);
    else if (key == "p1") cfg.model.pcp.p1 = parse_double(full, value);
    else if (key == "p2") cfg.model.pcp.p2 = parse_double(full, value);
    else if (key == "eta1") cfg.model.pcp.eta1 = parse_double(full, value);
    else if (key == "eta2") cfg.model.pcp.eta2 = parse_double(full, value);
    else
      throw std::invalid_argument("unknown config key: " + full);
  } else if (section == "window") {
    if (key == "side") cfg.window_side_km = parse_double(full, value);
    else if (key == "guard") cfg.guard_km = parse_double_or_auto(full, value);
    else
      throw std::invalid_argument("unknown config key: " + full);
  } else if (section == "channel") {
    if (key == "noise_power") cfg.noise_power = parse_double(full, value);
    else
      throw std::invalid_argument("unknown config key: " + full);
  } else if (section == "trajectory") {
    if (key == "length") cfg.trajectory_len_km = parse_double(full, value);
    else if (key == "step") cfg.step_km = parse_double_or_auto(full, value);
    else if (key == "tol") cfg.tol_km = parse_double_or_auto(full, value);
    else
      throw std::invalid_argument("unknown config key: " + full);
  } else if (section == "metrics") {
    if (key == "velocities")
      cfg.velocities_kmh = parse_number_list(full, value);
    else if (key == "ho_delay") cfg.ho_delay_s = parse_double(full, value);
    else if (key == "bandwidth") cfg.bandwidth_hz = parse_double(full, value);
    else if (key == "thresholds_db")
      cfg.thresholds_db = parse_number_list(full, value);
    else
      throw std::invalid_argument("unknown config key: " + full);
  } else {
    throw std::invalid_argument("unknown config section: " + section);
  }
}

void set_policy_key(PolicyConfig& p, const std::string& section,
                    const std::string& key, const std::string& value) {
  const std::string full = section + "." + key;
  if (key == "kind") p.kind = parse_kind(full, value);
  else if (key == "distance_threshold")
    p.min_dist_threshold_km = parse_double(full, value);
  else if (key == "area_threshold")
    p.area_threshold_km2 = parse_double(full, value);
  else if (key == "ic") p.ic_enabled = parse_bool(full, value);
  else if (key == "comp") p.comp_enabled = parse_bool(full, value);
  else if (key == "area_probe_count")
    p.area_probe_count = static_cast<int>(parse_long(full, value));
  else
    throw std::invalid_argument("unknown config key: " + full);
}

}  // namespace

ScenarioConfig load_config(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is)
    throw std::invalid_argument("cannot open config file: " + file.string());
  const SectionMap sections = parse_ini(is);

  ScenarioConfig cfg;
  cfg.policies.clear();
  for (const auto& [section, keys] : sections) {
    if (section == "policies" || section.rfind("policy.", 0) == 0) continue;
    for (const auto& [key, value] : keys)
      set_scenario_key(cfg, section, key, value);
  }

  std::vector<std::string> names;
  if (auto it = sections.find("policies"); it != sections.end()) {
    auto kit = it->second.find("list");
    if (kit == it->second.end())
      throw std::invalid_argument("policies.list: missing");
    std::stringstream ss(kit->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) names.push_back(item);
    }
  }
  for (const auto& name : names) {
    PolicyConfig p;
    p.name = name;
    p.area_probe_count = cfg.area_probe_count;
    if (auto k = kind_from_name(name)) p.kind = *k;
    const std::string section = "policy." + lower(name);
    if (auto it = sections.find(section); it != sections.end())
      for (const auto& [key, value] : it->second)
        set_policy_key(p, section, key, value);
    cfg.policies.push_back(std::move(p));
  }
  for (const auto& [section, keys] : sections) {
    if (section.rfind("policy.", 0) != 0) continue;
    const std::string name = section.substr(7);
    const bool known =
        std::any_of(cfg.policies.begin(), cfg.policies.end(),
                    [&](const auto& p) { return lower(p.name) == name; });
    if (!known)
      throw std::invalid_argument("config section " + section +
                                  " has no matching entry in policies.list");
  }
  cfg.validate();
  return cfg;
}

void apply_override(ScenarioConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("override must look like section.key=value: " +
                                assignment);
  const std::string path = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  const auto dot = path.rfind('.');
  if (dot == std::string::npos)
    throw std::invalid_argument("override key needs a section: " + path);
  const std::string section = lower(path.substr(0, dot));
  const std::string key = lower(path.substr(dot + 1));
  if (section.rfind("policy.", 0) == 0) {
    const std::string name = section.substr(7);
    for (auto& p : cfg.policies) {
      if (lower(p.name) == name) {
        set_policy_key(p, section, key, value);
        return;
      }
    }
    throw std::invalid_argument("override: unknown policy " + name);
  }
  set_scenario_key(cfg, section, key, value);
}

namespace {

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string canonical_string(const ScenarioConfig& c) {
  std::ostringstream os;
  os << c.name << '|' << (c.model.tag == ModelTag::Ppp ? "ppp" : "matern")
     << '|' << fmt_g(c.model.lambda) << '|' << fmt_g(c.model.power) << '|'
     << fmt_g(c.model.path_loss_exp) << '|' << fmt_g(c.model.pcp.lambda_p)
     << '|' << fmt_g(c.model.pcp.lambda_c) << '|' << fmt_g(c.model.pcp.radius)
     << '|' << fmt_g(c.model.pcp.p1) << '|' << fmt_g(c.model.pcp.p2) << '|'
     << fmt_g(c.model.pcp.eta1) << '|' << fmt_g(c.model.pcp.eta2) << '|'
     << fmt_g(c.window_side_km) << '|' << fmt_g(c.guard_km) << '|'
     << fmt_g(c.noise_power) << '|' << fmt_g(c.trajectory_len_km) << '|'
     << fmt_g(c.step_km) << '|' << fmt_g(c.tol_km) << '|'
     << fmt_g(c.ho_delay_s) << '|' << fmt_g(c.bandwidth_hz) << '|'
     << c.n_replications << '|' << c.rate_samples_per_rep << '|'
     << c.coverage_samples_per_rep << '|' << c.area_probe_count << '|'
     << c.master_seed;
  for (double v : c.velocities_kmh) os << ",v" << fmt_g(v);
  for (double t : c.thresholds_db) os << ",t" << fmt_g(t);
  for (const auto& p : c.policies) {
    os << ";" << p.name << ':' << policy_kind_name(p.kind) << ':'
       << (p.min_dist_threshold_km ? fmt_g(*p.min_dist_threshold_km) : "-")
       << ':' << (p.area_threshold_km2 ? fmt_g(*p.area_threshold_km2) : "-")
       << ':' << p.ic_enabled << ':' << p.comp_enabled << ':'
       << p.area_probe_count;
  }
  return os.str();
}

}  // namespace

std::string config_digest(const ScenarioConfig& config) {
  const std::string s = canonical_string(config);
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

namespace {

nlohmann::json policy_json(const PolicyConfig& p) {
  nlohmann::json j;
  j["name"] = p.name;
  j["kind"] = policy_kind_name(p.kind);
  if (p.min_dist_threshold_km) j["distance_threshold_km"] = *p.min_dist_threshold_km;
  if (p.area_threshold_km2) j["area_threshold_km2"] = *p.area_threshold_km2;
  j["ic"] = p.ic_enabled;
  j["comp"] = p.comp_enabled;
  j["area_probe_count"] = p.area_probe_count;
  return j;
}

nlohmann::json config_json(const ScenarioConfig& c) {
  nlohmann::json j;
  j["name"] = c.name;
  j["model"]["kind"] = c.model.tag == ModelTag::Ppp ? "ppp" : "matern";
  if (c.model.tag == ModelTag::Ppp) {
    j["model"]["lambda"] = c.model.lambda;
    j["model"]["power"] = c.model.power;
    j["model"]["path_loss_exp"] = c.model.path_loss_exp;
  } else {
    j["model"]["lambda_p"] = c.model.pcp.lambda_p;
    j["model"]["lambda_c"] = c.model.pcp.lambda_c;
    j["model"]["radius"] = c.model.pcp.radius;
    j["model"]["p1"] = c.model.pcp.p1;
    j["model"]["p2"] = c.model.pcp.p2;
    j["model"]["eta1"] = c.model.pcp.eta1;
    j["model"]["eta2"] = c.model.pcp.eta2;
  }
  j["window"]["side_km"] = c.window_side_km;
  j["window"]["guard_km"] = c.resolved_guard();
  j["channel"]["noise_power"] = c.noise_power;
  j["trajectory"]["length_km"] = c.trajectory_len_km;
  j["trajectory"]["step_km"] = c.resolved_step();
  j["trajectory"]["tol_km"] = c.resolved_tol();
  j["metrics"]["velocities_kmh"] = c.velocities_kmh;
  j["metrics"]["ho_delay_s"] = c.ho_delay_s;
  j["metrics"]["bandwidth_hz"] = c.bandwidth_hz;
  j["metrics"]["thresholds_db"] = c.thresholds_db;
  j["replications"] = c.n_replications;
  j["rate_samples_per_rep"] = c.rate_samples_per_rep;
  j["coverage_samples_per_rep"] = c.coverage_samples_per_rep;
  j["area_probe_count"] = c.area_probe_count;
  j["master_seed"] = c.master_seed;
  j["policies"] = nlohmann::json::array();
  for (const auto& p : c.policies) j["policies"].push_back(policy_json(p));
  return j;
}

}  // namespace

std::vector<std::filesystem::path> write_scenario_outputs(
    const ScenarioResult& result, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  const fs::path dir = out_dir / result.config.name;
  fs::create_directories(dir);

  char line[512];
  for (const auto& scheme : result.schemes) {
    const fs::path sdir = dir / scheme.policy.name;
    fs::create_directories(sdir);

    {
      std::ofstream os(sdir / "metrics.csv");
      if (!os)
        throw std::runtime_error("cannot write " +
                                 (sdir / "metrics.csv").string());
      os << "velocity_kmh,spectral_eff,spectral_eff_se,ho_per_km,ho_per_km_se,"
            "ho_per_s,ho_cost,throughput_nats_s,throughput_ci_halfwidth\n";
      for (double v : result.config.velocities_kmh) {
        const auto r = scheme.report_at(v, result.config.ho_delay_s,
                                        result.config.bandwidth_hz);
        std::snprintf(line, sizeof line,
                      "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                      r.velocity_kmh, r.spectral_eff, r.spectral_eff_se,
                      r.ho_per_km, r.ho_per_km_se, r.ho_per_s, r.cost,
                      r.throughput_nats_s, r.throughput_ci);
        os << line;
      }
      files.push_back(sdir / "metrics.csv");
    }

    if (!scheme.coverage.threshold.empty()) {
      std::ofstream os(sdir / "coverage.csv");
      if (!os)
        throw std::runtime_error("cannot write " +
                                 (sdir / "coverage.csv").string());
      os << "threshold_db,threshold,probability,ci_halfwidth,n_samples\n";
      const auto& c = scheme.coverage;
      for (std::size_t i = 0; i < c.threshold.size(); ++i) {
        std::snprintf(line, sizeof line, "%.10g,%.10g,%.10g,%.10g,%zu\n",
                      linear_to_db(c.threshold[i]), c.threshold[i],
                      c.probability[i], c.ci_halfwidth[i], c.n_samples);
        os << line;
      }
      files.push_back(sdir / "coverage.csv");
    }
  }

  nlohmann::json manifest;
  manifest["scenario"] = result.config.name;
  manifest["version"] = kVersion;
  manifest["config_digest"] = config_digest(result.config);
  manifest["config"] = config_json(result.config);
  manifest["replication_seeds"] = result.replication_seeds;
  manifest["counters"]["deployment_resamples"] = result.deployment_resamples;
  manifest["counters"]["sliver_merges"] = result.sliver_merges;
  manifest["counters"]["total_visits"] = result.total_visits;
  manifest["total_trajectory_km"] = result.total_trajectory_km;
  manifest["wall_seconds"] = result.wall_seconds;
  manifest["results"] = nlohmann::json::array();
  for (const auto& s : result.schemes) {
    nlohmann::json r;
    r["scheme"] = s.policy.name;
    r["spectral_eff"] = s.rate.mean;
    r["spectral_eff_se"] = s.rate.std_err;
    r["rate_samples"] = s.rate.n;
    r["ho_per_km"] = s.ho_per_km;
    r["ho_per_km_se"] = s.ho_per_km_se;
    r["skip_fraction"] = s.skip_fraction;
    r["blackout_fraction"] = s.blackout_fraction;
    manifest["results"].push_back(r);
  }
  {
    std::ofstream os(dir / "manifest.json");
    if (!os)
      throw std::runtime_error("cannot write " +
                               (dir / "manifest.json").string());
    os << manifest.dump(2) << "\n";
    files.push_back(dir / "manifest.json");
  }
  return files;
}

}  // namespace hoskip
