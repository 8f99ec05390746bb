#include "adammcmc/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace adammcmc {

namespace {

using ordered_json = nlohmann::ordered_json;

// Calls f(name, member) for every field in serialization order.
template <class Config, class F>
void visit_fields(Config& c, F&& f) {
  f("target", c.target);
  f("dim", c.dim);
  f("banana_curvature", c.banana_curvature);
  f("linear_slope", c.linear_slope);
  f("dataset", c.dataset);
  f("n_train", c.n_train);
  f("n_test", c.n_test);
  f("data_noise", c.data_noise);
  f("data_seed", c.data_seed);
  f("hidden", c.hidden);
  f("weight_scale", c.weight_scale);
  f("init_offset", c.init_offset);
  f("sampler", c.sampler);
  f("lambda", c.lambda);
  f("gamma", c.gamma);
  f("sigma", c.sigma);
  f("sigma_dir", c.sigma_dir);
  f("beta1", c.beta1);
  f("beta2", c.beta2);
  f("delta", c.delta);
  f("drift", c.drift);
  f("prior_half_width", c.prior_half_width);
  f("correction", c.correction);
  f("s2", c.s2);
  f("rho1", c.rho1);
  f("rho2", c.rho2);
  f("sghmc_friction", c.sghmc_friction);
  f("sghmc_noise", c.sghmc_noise);
  f("batch_size", c.batch_size);
  f("stochastic_mh", c.stochastic_mh);
  f("steps", c.steps);
  f("burn_in", c.burn_in);
  f("gap", c.gap);
  f("n_samples", c.n_samples);
  f("seed", c.seed);
  f("out_dir", c.out_dir);
}

struct Writer {
  ordered_json& out;
  template <class T>
  void operator()(const char* name, const T& value) const {
    out[name] = value;
  }
  void operator()(const char* name, const std::optional<double>& value) const {
    out[name] = value ? ordered_json(*value) : ordered_json(nullptr);
  }
};

struct Reader {
  const ordered_json& in;
  std::set<std::string>& seen;

  const ordered_json* find(const char* name) const {
    auto it = in.find(name);
    if (it == in.end()) return nullptr;
    seen.insert(name);
    return &*it;
  }
  static void fail(const char* name, const char* expected) {
    throw ConfigError(name, std::string("expected ") + expected);
  }

  void operator()(const char* name, std::string& v) const {
    if (const auto* j = find(name)) {
      if (!j->is_string()) fail(name, "a string");
      v = j->get<std::string>();
    }
  }
  void operator()(const char* name, double& v) const {
    if (const auto* j = find(name)) {
      if (!j->is_number()) fail(name, "a number");
      v = j->get<double>();
    }
  }
  void operator()(const char* name, int& v) const {
    if (const auto* j = find(name)) {
      if (!j->is_number_integer()) fail(name, "an integer");
      v = j->get<int>();
    }
  }
  void operator()(const char* name, std::int64_t& v) const {
    if (const auto* j = find(name)) {
      if (!j->is_number_integer()) fail(name, "an integer");
      v = j->get<std::int64_t>();
    }
  }
  void operator()(const char* name, std::uint64_t& v) const {
    if (const auto* j = find(name)) {
      if (!j->is_number_unsigned()) fail(name, "a non-negative integer");
      v = j->get<std::uint64_t>();
    }
  }
  void operator()(const char* name, bool& v) const {
    if (const auto* j = find(name)) {
      if (!j->is_boolean()) fail(name, "a boolean");
      v = j->get<bool>();
    }
  }
  void operator()(const char* name, std::optional<double>& v) const {
    if (const auto* j = find(name)) {
      if (j->is_null()) {
        v.reset();
      } else if (j->is_number()) {
        v = j->get<double>();
      } else {
        fail(name, "a number or null");
      }
    }
  }
  void operator()(const char* name, std::vector<int>& v) const {
    if (const auto* j = find(name)) {
      if (!j->is_array()) fail(name, "an array of integers");
      v.clear();
      for (const auto& e : *j) {
        if (!e.is_number_integer()) fail(name, "an array of integers");
        v.push_back(e.get<int>());
      }
    }
  }
};

ordered_json to_ordered(const RunConfig& c) {
  ordered_json out = ordered_json::object();
  visit_fields(c, Writer{out});
  return out;
}

void require(bool ok, const char* field, const char* message) {
  if (!ok) throw ConfigError(field, message);
}

}  // namespace

void RunConfig::validate() const {
  require(target == "quadratic" || target == "banana" || target == "linear" || target == "mlp",
          "target", "must be one of quadratic, banana, linear, mlp");
  require(dim >= 1, "dim", "must be >= 1");
  require(banana_curvature > 0.0, "banana_curvature", "must be positive");
  require(n_train >= 2, "n_train", "must be >= 2");
  require(n_test >= 1, "n_test", "must be >= 1");
  require(data_noise >= 0.0, "data_noise", "must be non-negative");
  for (int h : hidden) require(h >= 1, "hidden", "layer widths must be positive");
  require(weight_scale > 0.0 && std::isfinite(weight_scale), "weight_scale", "must be positive");
  require(sampler == "mala" || sampler == "adammcmc" || sampler == "adam" || sampler == "sgd" ||
              sampler == "sghmc",
          "sampler", "must be one of mala, adammcmc, adam, sgd, sghmc");
  require(lambda > 0.0 && std::isfinite(lambda), "lambda", "must be positive");
  require(gamma > 0.0 && std::isfinite(gamma), "gamma", "must be positive");
  require(sigma > 0.0 && std::isfinite(sigma), "sigma", "must be positive");
  require(!sigma_dir || (*sigma_dir >= 0.0 && std::isfinite(*sigma_dir)), "sigma_dir",
          "must be non-negative");
  require(beta1 >= 0.0 && beta1 < 1.0, "beta1", "must lie in [0, 1)");
  require(beta2 >= 0.0 && beta2 < 1.0, "beta2", "must lie in [0, 1)");
  require(delta > 0.0, "delta", "must be positive");
  require(drift == "adam" || drift == "gradient", "drift", "must be adam or gradient");
  require(prior_half_width > 0.0, "prior_half_width", "must be positive");
  require(correction == "unit" || correction == "full", "correction", "must be unit or full");
  require(s2 > 0.0, "s2", "must be positive");
  require(!rho1 || *rho1 > 0.0, "rho1", "must be positive");
  require(!rho2 || *rho2 > 0.0, "rho2", "must be positive");
  require(sghmc_friction >= 0.0 && sghmc_friction <= 1.0, "sghmc_friction", "must lie in [0, 1]");
  require(sghmc_noise >= 0.0, "sghmc_noise", "must be non-negative");
  require(batch_size >= 0, "batch_size", "must be >= 0");
  require(target != "mlp" || batch_size <= n_train, "batch_size", "must not exceed n_train");
  require(steps >= 1, "steps", "must be >= 1");
  require(burn_in >= 0, "burn_in", "must be >= 0");
  require(gap >= 1, "gap", "must be >= 1");
  require(n_samples >= 1, "n_samples", "must be >= 1");
  require(burn_in + n_samples * gap <= steps, "steps", "must be >= burn_in + n_samples * gap");
}

std::string RunConfig::to_json() const { return to_ordered(*this).dump(2) + "\n"; }

RunConfig RunConfig::from_json(const std::string& text) {
  ordered_json in;
  try {
    in = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<config>", std::string("invalid JSON: ") + e.what());
  }
  if (!in.is_object()) throw ConfigError("<config>", "expected a JSON object");
  RunConfig c;
  std::set<std::string> seen;
  visit_fields(c, Reader{in, seen});
  for (const auto& [key, value] : in.items()) {
    if (!seen.contains(key)) throw ConfigError(key, "unknown key");
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("<config>", "cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return from_json(ss.str());
}

std::string RunConfig::hash() const {
  ordered_json j = to_ordered(*this);
  j.erase("out_dir");
  const std::string text = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool is_scan_param(const std::string& name) {
  return name == "sigma" || name == "sigma_dir" || name == "beta" || name == "lambda";
}

void set_scan_param(RunConfig& config, const std::string& name, double value) {
  if (name == "sigma") {
    config.sigma = value;
  } else if (name == "sigma_dir") {
    config.sigma_dir = value;
  } else if (name == "beta") {
    config.beta1 = value;
    config.beta2 = value;
  } else if (name == "lambda") {
    config.lambda = value;
  } else {
    throw ConfigError(name, "unknown scan parameter (expected sigma, sigma_dir, beta, lambda)");
  }
}

}  // namespace adammcmc
