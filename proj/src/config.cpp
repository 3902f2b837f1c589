#include "resv/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace resv {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& item : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; });
    if (!known) fail(join(path, item.key()), "unknown key");
  }
}

const json& require(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) fail(join(path, key), "missing required key");
  return obj.at(key);
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(path, "expected a finite number");
  return x;
}

std::int64_t integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<std::int64_t>();
}

std::uint64_t count(const json& v, const std::string& path) {
  const std::int64_t x = integer(v, path);
  if (x < 0) fail(path, "must be nonnegative");
  return static_cast<std::uint64_t>(x);
}

// An integer is broadcast to every server; a list must have N entries.
std::vector<int> per_server(const json& v, std::size_t n, const std::string& path) {
  if (v.is_number_integer()) return std::vector<int>(n, static_cast<int>(integer(v, path)));
  if (!v.is_array() || v.size() != n) fail(path, "expected an integer or a list of " + std::to_string(n));
  std::vector<int> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(static_cast<int>(integer(v[i], path + "[" + std::to_string(i) + "]")));
  return out;
}

Polynomial polynomial(const json& v, const std::string& path) {
  if (v.is_null()) return Polynomial{};
  if (!v.is_array()) fail(path, "expected a coefficient list");
  std::vector<double> coefficients;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double c = number(v[i], path + "[" + std::to_string(i) + "]");
    if (c < 0.0) fail(path + "[" + std::to_string(i) + "]", "coefficients must be nonnegative");
    coefficients.push_back(c);
  }
  return Polynomial(std::move(coefficients));
}

bool is_coefficient_list(const json& v) {
  return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); });
}

// One coefficient list shared by every server, or one list per server.
std::vector<Polynomial> per_server_polynomials(const json& v, std::size_t n, const std::string& path) {
  if (is_coefficient_list(v)) return std::vector<Polynomial>(n, polynomial(v, path));
  if (!v.is_array() || v.size() != n) fail(path, "expected a coefficient list or " + std::to_string(n) + " of them");
  std::vector<Polynomial> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(polynomial(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::vector<Polynomial>> transfer_matrix(const json& v, std::size_t n, const std::string& path) {
  std::vector<std::vector<Polynomial>> out(n, std::vector<Polynomial>(n));
  if (is_coefficient_list(v)) {
    const Polynomial shared = polynomial(v, path);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j) out[i][j] = shared;
      }
    }
    return out;
  }
  if (!v.is_array() || v.size() != n) fail(path, "expected a coefficient list or an N x N matrix of them");
  for (std::size_t i = 0; i < n; ++i) {
    const std::string row = path + "[" + std::to_string(i) + "]";
    if (!v[i].is_array() || v[i].size() != n) fail(row, "expected " + std::to_string(n) + " coefficient lists");
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) out[i][j] = polynomial(v[i][j], row + "[" + std::to_string(j) + "]");
    }
  }
  return out;
}

PolicySpec parse_policy(const json& v, const std::string& path) {
  if (!v.is_object()) fail(path, "expected an object");
  const json& kind_json = require(v, path, "kind");
  if (!kind_json.is_string()) fail(join(path, "kind"), "expected a string");
  const auto kind = policy_kind_from_string(kind_json.get<std::string>());
  if (!kind) fail(join(path, "kind"), "unknown policy '" + kind_json.get<std::string>() + "'");

  PolicySpec spec;
  spec.kind = *kind;
  switch (*kind) {
    case PolicyKind::kEwFull:
      only_keys(v, path, {"kind", "name", "eta"});
      break;
    case PolicyKind::kEwDiscounted:
      only_keys(v, path, {"kind", "name", "eta", "discount"});
      break;
    case PolicyKind::kEwExplore:
      only_keys(v, path, {"kind", "name", "eta", "budget", "placeholder_redraw"});
      break;
    case PolicyKind::kRlBandit:
      only_keys(v, path, {"kind", "name", "beta", "tau", "q_init"});
      break;
  }
  if (v.contains("name")) {
    if (!v["name"].is_string() || v["name"].get<std::string>().empty()) fail(join(path, "name"), "expected a nonempty string");
    spec.name = v["name"].get<std::string>();
    if (spec.name.find_first_of("/\\") != std::string::npos) fail(join(path, "name"), "must not contain path separators");
  }
  if (v.contains("eta")) {
    spec.eta = number(v["eta"], join(path, "eta"));
    if (!(*spec.eta > 0.0)) fail(join(path, "eta"), "must be positive");
  }
  if (v.contains("discount")) spec.discount = number(v["discount"], join(path, "discount"));
  if (!(spec.discount > 0.0 && spec.discount <= 1.0)) fail(join(path, "discount"), "must lie in (0, 1]");
  if (v.contains("budget")) spec.budget = count(v["budget"], join(path, "budget"));
  if (spec.budget < 1) fail(join(path, "budget"), "must be at least 1");
  if (v.contains("placeholder_redraw")) {
    if (!v["placeholder_redraw"].is_boolean()) fail(join(path, "placeholder_redraw"), "expected true or false");
    spec.placeholder_redraw = v["placeholder_redraw"].get<bool>();
  }
  if (v.contains("beta")) spec.beta = number(v["beta"], join(path, "beta"));
  if (!(spec.beta > 0.0 && spec.beta <= 1.0)) fail(join(path, "beta"), "must lie in (0, 1]");
  if (v.contains("tau")) spec.tau = number(v["tau"], join(path, "tau"));
  if (!(spec.tau > 0.0)) fail(join(path, "tau"), "must be positive");
  if (v.contains("q_init")) spec.q_init = number(v["q_init"], join(path, "q_init"));
  return spec;
}

Scenario parse_scenario(const json& v, const IntegerBox& box, const std::string& path) {
  if (!v.is_object()) fail(path, "expected an object");
  const json& kind = require(v, path, "kind");
  if (!kind.is_string()) fail(join(path, "kind"), "expected a string");
  const std::string name = kind.get<std::string>();
  Scenario s;
  if (name == "iid_uniform") {
    only_keys(v, path, {"kind"});
    s.kind = ScenarioKind::kIidUniform;
  } else if (name == "iid_categorical") {
    only_keys(v, path, {"kind", "weights"});
    s.kind = ScenarioKind::kIidCategorical;
    const json& w = require(v, path, "weights");
    if (!w.is_array() || w.size() != box.cardinality()) {
      fail(join(path, "weights"), "expected " + std::to_string(box.cardinality()) + " weights, one per request vector");
    }
    double total = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double x = number(w[k], join(path, "weights") + "[" + std::to_string(k) + "]");
      if (x < 0.0) fail(join(path, "weights") + "[" + std::to_string(k) + "]", "must be nonnegative");
      s.weights.push_back(x);
      total += x;
    }
    if (!(total > 0.0)) fail(join(path, "weights"), "must not all be zero");
  } else if (name == "piecewise_constant") {
    only_keys(v, path, {"kind", "period", "blocks"});
    s.kind = ScenarioKind::kPiecewiseConstant;
    s.period = count(require(v, path, "period"), join(path, "period"));
    if (s.period == 0) fail(join(path, "period"), "must be positive");
    if (v.contains("blocks")) {
      const json& blocks = v["blocks"];
      if (!blocks.is_array()) fail(join(path, "blocks"), "expected a list of request vectors");
      for (std::size_t k = 0; k < blocks.size(); ++k) {
        const std::string at = join(path, "blocks") + "[" + std::to_string(k) + "]";
        std::vector<int> b = per_server(blocks[k], box.dims(), at);
        if (!box.contains(b)) fail(at, "outside the request bounds");
        s.block_vectors.push_back(std::move(b));
      }
    }
  } else {
    fail(join(path, "kind"), "unknown scenario '" + name + "'");
  }
  return s;
}

json polynomial_json(const Polynomial& p) { return json(p.coefficients()); }

json scenario_json(const Scenario& s) {
  switch (s.kind) {
    case ScenarioKind::kIidUniform:
      return json{{"kind", "iid_uniform"}};
    case ScenarioKind::kIidCategorical:
      return json{{"kind", "iid_categorical"}, {"weights", s.weights}};
    case ScenarioKind::kPiecewiseConstant: {
      json out{{"kind", "piecewise_constant"}, {"period", s.period}};
      if (!s.block_vectors.empty()) out["blocks"] = s.block_vectors;
      return out;
    }
  }
  return json{};
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  if (doc.is_object() && doc.contains("artifact_version") && doc.contains("config")) return parse_config(doc["config"]);

  only_keys(doc, "", {"schema_version", "network", "costs", "policies", "scenario", "horizon", "seeds", "output_dir"});
  const json& version = require(doc, "", "schema_version");
  if (integer(version, "schema_version") != kSchemaVersion) {
    fail("schema_version", "unsupported version (expected " + std::to_string(kSchemaVersion) + ")");
  }

  const json& net = require(doc, "", "network");
  only_keys(net, "network", {"servers", "min_reservation", "max_reservation", "request_min", "request_max"});
  const std::uint64_t n = count(require(net, "network", "servers"), "network.servers");
  if (n == 0) fail("network.servers", "must be positive");
  const std::vector<int> min_res = per_server(require(net, "network", "min_reservation"), n, "network.min_reservation");
  const std::vector<int> max_res = per_server(require(net, "network", "max_reservation"), n, "network.max_reservation");
  const std::vector<int> req_min =
      net.contains("request_min") ? per_server(net["request_min"], n, "network.request_min") : std::vector<int>(n, 1);
  const std::vector<int> req_max =
      net.contains("request_max") ? per_server(net["request_max"], n, "network.request_max") : max_res;

  ExperimentConfig config;
  try {
    config.instance.space = ActionSpace(min_res, max_res);
  } catch (const std::exception& e) {
    fail("network.min_reservation", e.what());
  }
  config.instance.requests = RequestBounds{req_min, req_max};
  IntegerBox request_box;
  try {
    request_box = config.instance.requests.box();
  } catch (const std::exception& e) {
    fail("network.request_min", e.what());
  }

  const json& costs = require(doc, "", "costs");
  only_keys(costs, "costs", {"reservation", "violation", "transfer"});
  try {
    config.instance.model = CostModel(per_server_polynomials(require(costs, "costs", "reservation"), n, "costs.reservation"),
                                      per_server_polynomials(require(costs, "costs", "violation"), n, "costs.violation"),
                                      transfer_matrix(require(costs, "costs", "transfer"), n, "costs.transfer"));
    int largest = 0;
    for (std::size_t i = 0; i < n; ++i) largest = std::max({largest, max_res[i], req_max[i]});
    config.instance.model.check_monotone(largest);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail("costs", e.what());
  }

  const json& policies = require(doc, "", "policies");
  if (!policies.is_array() || policies.empty()) fail("policies", "expected a nonempty list");
  std::set<std::string> labels;
  for (std::size_t k = 0; k < policies.size(); ++k) {
    const std::string path = "policies[" + std::to_string(k) + "]";
    PolicySpec spec = parse_policy(policies[k], path);
    if (!labels.insert(spec.label()).second) fail(path, "duplicate policy name '" + spec.label() + "'");
    config.policies.push_back(std::move(spec));
  }

  config.horizon = count(require(doc, "", "horizon"), "horizon");
  config.scenario = parse_scenario(require(doc, "", "scenario"), request_box, "scenario");

  const json& seeds = require(doc, "", "seeds");
  if (!seeds.is_array() || seeds.empty()) fail("seeds", "expected a nonempty list of integers");
  for (std::size_t k = 0; k < seeds.size(); ++k) config.seeds.push_back(count(seeds[k], "seeds[" + std::to_string(k) + "]"));

  if (doc.contains("output_dir")) {
    if (!doc["output_dir"].is_string()) fail("output_dir", "expected a string");
    config.output_dir = doc["output_dir"].get<std::string>();
  }

  // Resolve eta so the manifest records the value actually used.
  for (PolicySpec& spec : config.policies) {
    if (spec.kind != PolicyKind::kRlBandit) spec.eta = resolved_eta(spec, config.instance, config.horizon);
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

json to_json(const ExperimentConfig& config) {
  const Instance& inst = config.instance;
  const std::size_t n = inst.space.dims();
  json reservation = json::array();
  json violation = json::array();
  json transfer = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    reservation.push_back(polynomial_json(inst.model.reservation(i)));
    violation.push_back(polynomial_json(inst.model.violation(i)));
    json row = json::array();
    for (std::size_t j = 0; j < n; ++j) row.push_back(polynomial_json(inst.model.transfer(i, j)));
    transfer.push_back(std::move(row));
  }

  json policies = json::array();
  for (const PolicySpec& p : config.policies) {
    json out{{"kind", to_string(p.kind)}, {"name", p.label()}};
    switch (p.kind) {
      case PolicyKind::kEwFull:
        out["eta"] = resolved_eta(p, inst, config.horizon);
        break;
      case PolicyKind::kEwDiscounted:
        out["eta"] = resolved_eta(p, inst, config.horizon);
        out["discount"] = p.discount;
        break;
      case PolicyKind::kEwExplore:
        out["eta"] = resolved_eta(p, inst, config.horizon);
        out["budget"] = p.budget;
        out["placeholder_redraw"] = p.placeholder_redraw;
        break;
      case PolicyKind::kRlBandit:
        out["beta"] = p.beta;
        out["tau"] = p.tau;
        out["q_init"] = p.q_init;
        break;
    }
    policies.push_back(std::move(out));
  }

  return json{
      {"schema_version", kSchemaVersion},
      {"network",
       {{"servers", n},
        {"min_reservation", inst.space.lo()},
        {"max_reservation", inst.space.hi()},
        {"request_min", inst.requests.lo},
        {"request_max", inst.requests.hi.value_or(inst.space.hi())}}},
      {"costs", {{"reservation", reservation}, {"violation", violation}, {"transfer", transfer}}},
      {"policies", policies},
      {"scenario", scenario_json(config.scenario)},
      {"horizon", config.horizon},
      {"seeds", config.seeds},
      {"output_dir", config.output_dir},
  };
}

}  // namespace resv
