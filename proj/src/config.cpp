#include "biqme/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "biqme/error.hpp"

namespace biqme {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t b = 0;
  while (true) {
    const auto e = s.find(sep, b);
    out.push_back(trim(s.substr(b, e == std::string_view::npos ? std::string_view::npos : e - b)));
    if (e == std::string_view::npos) break;
    b = e + 1;
  }
  return out;
}

double to_real(std::string_view v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError("'" + std::string(v) + "' is not a number");
  return out;
}

long long to_int(std::string_view v) {
  long long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError("'" + std::string(v) + "' is not an integer");
  return out;
}

std::vector<double> to_list(std::string_view v) {
  std::vector<double> out;
  for (auto item : split(v, ',')) out.push_back(to_real(item));
  return out;
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename Seq>
std::string fmt_list(const Seq& s) {
  std::string out;
  for (double v : s) out += (out.empty() ? "" : ",") + fmt(v);
  return out;
}

struct Key {
  std::string name;
  std::function<void(ToolkitConfig&, std::string_view)> set;
  std::function<std::string(const ToolkitConfig&)> get;
};

template <typename Member>
Key real_key(std::string name, Member member) {
  return {std::move(name), [member](ToolkitConfig& c, std::string_view v) { member(c) = to_real(v); },
          [member](const ToolkitConfig& c) { return fmt(member(const_cast<ToolkitConfig&>(c))); }};
}

template <typename Member>
Key int_key(std::string name, Member member) {
  return {std::move(name),
          [member](ToolkitConfig& c, std::string_view v) {
            using T = std::remove_reference_t<decltype(member(c))>;
            member(c) = static_cast<T>(to_int(v));
          },
          [member](const ToolkitConfig& c) { return std::to_string(member(const_cast<ToolkitConfig&>(c))); }};
}

template <typename Member>
Key list_key(std::string name, Member member) {
  return {std::move(name), [member](ToolkitConfig& c, std::string_view v) { member(c) = to_list(v); },
          [member](const ToolkitConfig& c) { return fmt_list(member(const_cast<ToolkitConfig&>(c))); }};
}

#define BIQME_FIELD(expr) [](ToolkitConfig& c) -> auto& { return c.expr; }

const std::vector<Key>& registry() {
  static const std::vector<Key> keys = [] {
    std::vector<Key> k;
    k.push_back(int_key("pc.scales", BIQME_FIELD(features.pc.scales)));
    k.push_back(int_key("pc.orientations", BIQME_FIELD(features.pc.orientations)));
    k.push_back(real_key("pc.min_wavelength", BIQME_FIELD(features.pc.min_wavelength)));
    k.push_back(real_key("pc.multiplier", BIQME_FIELD(features.pc.multiplier)));
    k.push_back(real_key("pc.sigma_on_f", BIQME_FIELD(features.pc.sigma_on_f)));
    k.push_back(real_key("pc.angular_ratio", BIQME_FIELD(features.pc.angular_ratio)));
    k.push_back(real_key("pc.lowpass_cutoff", BIQME_FIELD(features.pc.lowpass_cutoff)));
    k.push_back(int_key("pc.lowpass_order", BIQME_FIELD(features.pc.lowpass_order)));
    k.push_back(real_key("pc.k_noise", BIQME_FIELD(features.pc.k_noise)));
    k.push_back(real_key("pc.cutoff", BIQME_FIELD(features.pc.cutoff)));
    k.push_back(real_key("pc.gain", BIQME_FIELD(features.pc.gain)));
    k.push_back(real_key("pc.epsilon", BIQME_FIELD(features.pc.epsilon)));
    k.push_back(real_key("pc.top_fraction", BIQME_FIELD(features.pc.top_fraction)));
    k.push_back(real_key("ce.gauss_sigma", BIQME_FIELD(features.ce.gauss_sigma)));
    k.push_back(real_key("ce.theta", BIQME_FIELD(features.ce.theta)));
    k.push_back(real_key("ce.phi_gr", BIQME_FIELD(features.ce.phi_gr)));
    k.push_back(real_key("ce.phi_yb", BIQME_FIELD(features.ce.phi_yb)));
    k.push_back(real_key("ce.phi_rg", BIQME_FIELD(features.ce.phi_rg)));
    k.push_back(real_key("le.hh_weight", BIQME_FIELD(features.le_hh_weight)));
    k.push_back({"brightness.multipliers",
                 [](ToolkitConfig& c, std::string_view v) {
                   const auto l = to_list(v);
                   if (l.size() != c.features.brightness.multipliers.size())
                     throw ConfigError("expected 6 multipliers");
                   std::copy(l.begin(), l.end(), c.features.brightness.multipliers.begin());
                 },
                 [](const ToolkitConfig& c) { return fmt_list(c.features.brightness.multipliers); }});
    k.push_back(real_key("brightness.lower", BIQME_FIELD(features.brightness.lower)));
    k.push_back(real_key("brightness.upper", BIQME_FIELD(features.brightness.upper)));
    k.push_back(int_key("nss.window", BIQME_FIELD(features.mscn.window)));
    k.push_back(real_key("nss.sigma", BIQME_FIELD(features.mscn.sigma)));
    k.push_back(real_key("nss.epsilon", BIQME_FIELD(features.mscn.epsilon)));
    k.push_back(int_key("cpcqi.patch", BIQME_FIELD(cpcqi.patch_size)));
    k.push_back(int_key("cpcqi.stride", BIQME_FIELD(cpcqi.stride)));
    k.push_back(real_key("cpcqi.c1", BIQME_FIELD(cpcqi.c1)));
    k.push_back(real_key("cpcqi.c2", BIQME_FIELD(cpcqi.c2)));
    k.push_back(real_key("cpcqi.c3", BIQME_FIELD(cpcqi.c3)));
    k.push_back(real_key("cpcqi.zeta", BIQME_FIELD(cpcqi.zeta)));
    k.push_back(real_key("cpcqi.phi", BIQME_FIELD(cpcqi.phi)));
    k.push_back(real_key("svr.t", BIQME_FIELD(svr.t)));
    k.push_back(real_key("svr.p", BIQME_FIELD(svr.p)));
    k.push_back(real_key("svr.k", BIQME_FIELD(svr.k)));
    k.push_back(real_key("svr.tolerance", BIQME_FIELD(solver.tolerance)));
    k.push_back(int_key("svr.max_iterations", BIQME_FIELD(solver.max_iterations)));
    k.push_back({"svr.cache_mb",
                 [](ToolkitConfig& c, std::string_view v) {
                   const long long mb = to_int(v);
                   if (mb < 1) throw ConfigError("cache size must be at least 1 MB");
                   c.solver.cache_bytes = static_cast<std::size_t>(mb) << 20;
                 },
                 [](const ToolkitConfig& c) { return std::to_string(c.solver.cache_bytes >> 20); }});
    k.push_back(list_key("svr.grid_t", BIQME_FIELD(grid.t_values)));
    k.push_back(list_key("svr.grid_k", BIQME_FIELD(grid.k_values)));
    k.push_back(list_key("svr.grid_p", BIQME_FIELD(grid.p_values)));
    k.push_back(int_key("svr.folds", BIQME_FIELD(grid.folds)));
    k.push_back(int_key("gen.per_op", BIQME_FIELD(gen.per_op)));
    k.push_back(real_key("gen.gamma_min", BIQME_FIELD(gen.gamma_min)));
    k.push_back(real_key("gen.gamma_max", BIQME_FIELD(gen.gamma_max)));
    k.push_back(real_key("gen.slope_min", BIQME_FIELD(gen.slope_min)));
    k.push_back(real_key("gen.slope_max", BIQME_FIELD(gen.slope_max)));
    k.push_back(real_key("gen.arch_min", BIQME_FIELD(gen.arch_min)));
    k.push_back(real_key("gen.arch_max", BIQME_FIELD(gen.arch_max)));
    k.push_back(real_key("gen.shift_max", BIQME_FIELD(gen.shift_max)));
    k.push_back(real_key("gen.he_strength_min", BIQME_FIELD(gen.he_strength_min)));
    k.push_back(list_key("boiem.lambda_b", BIQME_FIELD(boiem.lambda_b)));
    k.push_back({"boiem.lambda_pairs",
                 [](ToolkitConfig& c, std::string_view v) {
                   std::vector<std::pair<double, double>> pairs;
                   for (auto item : split(v, ',')) {
                     const auto parts = split(item, ':');
                     if (parts.size() != 2) throw ConfigError("lambda pair '" + std::string(item) + "' is not e:s");
                     pairs.emplace_back(to_real(parts[0]), to_real(parts[1]));
                   }
                   c.boiem.lambda_pairs = std::move(pairs);
                 },
                 [](const ToolkitConfig& c) {
                   std::string out;
                   for (auto [e, s] : c.boiem.lambda_pairs) out += (out.empty() ? "" : ",") + fmt(e) + ":" + fmt(s);
                   return out;
                 }});
    k.push_back(real_key("boiem.rayleigh_scale", BIQME_FIELD(boiem.rayleigh_scale)));
    k.push_back(int_key("eval.restarts", BIQME_FIELD(eval_restarts)));
    return k;
  }();
  return keys;
}

#undef BIQME_FIELD

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& k : registry()) out.push_back(k.name);
  return out;
}

void ToolkitConfig::validate() const {
  auto check = [](const char* section, const auto& fn) {
    try {
      fn();
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string(section) + ": " + e.what());
    }
  };
  check("features", [&] { features.validate(); });
  check("cpcqi", [&] { cpcqi.validate(); });
  check("svr", [&] { svr.validate(); });
  if (!(solver.tolerance > 0.0)) throw ConfigError("svr.tolerance must be positive");
  if (solver.max_iterations < 1) throw ConfigError("svr.max_iterations must be positive");
  if (grid.folds < 2) throw ConfigError("svr.folds must be at least 2");
  for (const auto* list : {&grid.t_values, &grid.k_values, &grid.p_values}) {
    if (list->empty()) throw ConfigError("svr grid lists must not be empty");
    for (double v : *list)
      if (!(v > 0.0)) throw ConfigError("svr grid values must be positive");
  }
  check("gen", [&] { gen.validate(); });
  check("boiem", [&] { boiem.validate(); });
  if (eval_restarts < 1) throw ConfigError("eval.restarts must be at least 1");
}

ToolkitConfig ToolkitConfig::parse(std::string_view text) {
  ToolkitConfig cfg;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    const auto& keys = registry();
    const auto it = std::find_if(keys.begin(), keys.end(), [&](const Key& k) { return k.name == key; });
    if (it == keys.end()) throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    try {
      it->set(cfg, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + key + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

ToolkitConfig ToolkitConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::vector<std::pair<std::string, std::string>> ToolkitConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : registry()) out.emplace_back(k.name, k.get(*this));
  return out;
}

std::string ToolkitConfig::echo() const {
  std::string out;
  for (const auto& [k, v] : entries()) out += k + " = " + v + "\n";
  return out;
}

}  // namespace biqme
