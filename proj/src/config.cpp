// Copyright 2026 The sctm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sctm/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "sctm/errors.hpp"

namespace sctm {

using nlohmann::json;

// ---- line tracking ----------------------------------------------------------------

namespace {

std::string escape_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

// Walks text that nlohmann already accepted, so it can assume well-formed JSON.
class LineScanner {
 public:
  LineScanner(std::string_view s, std::map<std::string, int>& out) : s_{s}, out_{out} {}

  void run() { value(""); }

 private:
  void skip_ws() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) {
      if (s_[i_] == '\n') ++line_;
      ++i_;
    }
  }

  std::string string_token() {
    std::string out;
    ++i_;  // opening quote
    while (i_ < s_.size() && s_[i_] != '"') {
      if (s_[i_] == '\\' && i_ + 1 < s_.size()) {
        const char e = s_[i_ + 1];
        switch (e) {
          case 'n':
            out += '\n';
            break;
          case 't':
            out += '\t';
            break;
          case 'u':
            out += "\\u";  // keys with unicode escapes only need to be unique
            break;
          default:
            out += e;
        }
        i_ += 2;
        continue;
      }
      out += s_[i_++];
    }
    ++i_;  // closing quote
    return out;
  }

  void value(const std::string& ptr) {
    skip_ws();
    if (i_ >= s_.size()) return;
    out_[ptr] = line_;
    const char c = s_[i_];
    if (c == '{') {
      ++i_;
      skip_ws();
      if (s_[i_] == '}') {
        ++i_;
        return;
      }
      while (i_ < s_.size()) {
        skip_ws();
        const std::string key = string_token();
        skip_ws();
        ++i_;  // colon
        value(ptr + "/" + escape_token(key));
        skip_ws();
        if (s_[i_] == ',') {
          ++i_;
          continue;
        }
        ++i_;  // closing brace
        return;
      }
    } else if (c == '[') {
      ++i_;
      skip_ws();
      if (s_[i_] == ']') {
        ++i_;
        return;
      }
      for (std::size_t idx = 0; i_ < s_.size(); ++idx) {
        value(ptr + "/" + std::to_string(idx));
        skip_ws();
        if (s_[i_] == ',') {
          ++i_;
          continue;
        }
        ++i_;
        return;
      }
    } else if (c == '"') {
      string_token();
    } else {
      while (i_ < s_.size() && s_[i_] != ',' && s_[i_] != '}' && s_[i_] != ']' &&
             !std::isspace(static_cast<unsigned char>(s_[i_]))) {
        ++i_;
      }
    }
  }

  std::string_view s_;
  std::map<std::string, int>& out_;
  std::size_t i_ = 0;
  int line_ = 1;
};

}  // namespace

std::map<std::string, int> json_pointer_lines(std::string_view text) {
  std::map<std::string, int> out;
  LineScanner(text, out).run();
  return out;
}

// ---- reading ----------------------------------------------------------------

namespace {

class Reader {
 public:
  Reader(std::map<std::string, int> lines, std::string variant_prefix)
      : lines_{std::move(lines)}, variant_prefix_{std::move(variant_prefix)} {}

  [[noreturn]] void fail(const std::string& ptr, const std::string& msg) const {
    throw ConfigError(msg + " (at " + (ptr.empty() ? "/" : ptr) + ")", line_of(ptr));
  }

  int line_of(std::string ptr) const {
    while (true) {
      if (!variant_prefix_.empty()) {
        if (auto it = lines_.find(variant_prefix_ + ptr); it != lines_.end()) return it->second;
      }
      if (auto it = lines_.find(ptr); it != lines_.end()) return it->second;
      if (ptr.empty()) return 0;
      ptr.erase(ptr.rfind('/'));
    }
  }

  void keys(const json& j, const std::string& ptr, std::initializer_list<std::string_view> allowed) const {
    if (!j.is_object()) fail(ptr, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
        fail(ptr + "/" + escape_token(it.key()), "unknown key \"" + it.key() + "\"");
      }
    }
  }

  const json& req(const json& j, const std::string& ptr, const std::string& key) const {
    if (!j.contains(key)) fail(ptr, "missing required key \"" + key + "\"");
    return j.at(key);
  }

  double num(const json& j, const std::string& ptr) const {
    if (!j.is_number()) fail(ptr, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(ptr, "expected a finite number");
    return v;
  }

  double num(const json& parent, const std::string& ptr, const std::string& key, double fallback) const {
    return parent.contains(key) ? num(parent.at(key), ptr + "/" + key) : fallback;
  }

  long integer(const json& j, const std::string& ptr) const {
    if (!j.is_number_integer()) fail(ptr, "expected an integer");
    return j.get<long>();
  }

  std::size_t count(const json& j, const std::string& ptr) const {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long>() >= 0)) {
      fail(ptr, "expected a non-negative integer");
    }
    return j.get<std::size_t>();
  }

  std::size_t count(const json& parent, const std::string& ptr, const std::string& key, std::size_t fallback) const {
    return parent.contains(key) ? count(parent.at(key), ptr + "/" + key) : fallback;
  }

  std::string str(const json& j, const std::string& ptr) const {
    if (!j.is_string()) fail(ptr, "expected a string");
    return j.get<std::string>();
  }

  bool boolean(const json& j, const std::string& ptr) const {
    if (!j.is_boolean()) fail(ptr, "expected true or false");
    return j.get<bool>();
  }

  const json& arr(const json& j, const std::string& ptr) const {
    if (!j.is_array()) fail(ptr, "expected an array");
    return j;
  }

  std::vector<int> ints(const json& j, const std::string& ptr) const {
    std::vector<int> out;
    const auto& a = arr(j, ptr);
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(static_cast<int>(integer(a[i], ptr + "/" + std::to_string(i))));
    return out;
  }

  std::vector<double> nums(const json& j, const std::string& ptr) const {
    std::vector<double> out;
    const auto& a = arr(j, ptr);
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(num(a[i], ptr + "/" + std::to_string(i)));
    return out;
  }

  RouteLabels route(const json& j, const std::string& ptr) const {
    const auto v = ints(j, ptr);
    if (v.size() != 3) fail(ptr, "a route is [u, v, w]");
    return {v[0], v[1], v[2]};
  }

  ParamRef param(const json& j, const std::string& ptr, const std::set<std::string>& names) const {
    if (j.is_number()) return ParamRef::constant(num(j, ptr));
    ParamRef p;
    if (j.is_string()) {
      p = ParamRef::of(j.get<std::string>());
    } else if (j.is_object()) {
      keys(j, ptr, {"design", "scale"});
      p = ParamRef::of(str(req(j, ptr, "design"), ptr + "/design"), num(j, ptr, "scale", 1.0));
    } else {
      fail(ptr, "expected a number, a design name, or {\"design\": name, \"scale\": s}");
    }
    if (!names.contains(p.design)) fail(ptr, "unknown design parameter \"" + p.design + "\"");
    return p;
  }

 private:
  std::map<std::string, int> lines_;
  std::string variant_prefix_;
};

CellParams read_cell_params(const Reader& rd, const json& j, const std::string& ptr, CellKind kind) {
  CellParams p;
  p.s_max = rd.num(rd.req(j, ptr, "s_max"), ptr + "/s_max");
  p.rho_max = rd.num(rd.req(j, ptr, "rho_max"), ptr + "/rho_max");
  p.a = rd.num(j, ptr, "a", 1.0);
  p.b = rd.num(j, ptr, "b", 1.0);
  p.c = rd.num(j, ptr, "c", 1.0);
  p.d = rd.num(j, ptr, "d", 1.0);
  p.zeta = rd.num(j, ptr, "zeta", 0.1);
  if (j.contains("approach_capacity")) p.approach_capacity = rd.nums(j.at("approach_capacity"), ptr + "/approach_capacity");
  try {
    CellSpec spec{kind, p, std::nullopt};
    // Parameter ranges only; arm counts are checked when the network is built.
    spec.validate(kind == CellKind::kHighway || kind == CellKind::kBidirectionalInterface ? 2 : 4);
  } catch (const ConfigError& e) {
    if (kind != CellKind::kMultiPopRoundabout) rd.fail(ptr, e.what());
  }
  return p;
}

RuleConfig read_rule(const Reader& rd, const json& j, const std::string& ptr) {
  RuleConfig r;
  static const std::set<std::string> kinds{"dpf", "cpf", "priority", "cooperative"};
  if (j.is_string()) {
    r.kind = j.get<std::string>();
  } else {
    rd.keys(j, ptr, {"kind", "weights", "orders"});
    r.kind = rd.str(rd.req(j, ptr, "kind"), ptr + "/kind");
    auto read_links = [&](const std::string& key, bool with_weights) {
      std::vector<LinkWeightsConfig> out;
      if (!j.contains(key)) return out;
      const auto& a = rd.arr(j.at(key), ptr + "/" + key);
      for (std::size_t i = 0; i < a.size(); ++i) {
        const std::string p = ptr + "/" + key + "/" + std::to_string(i);
        if (with_weights) {
          rd.keys(a[i], p, {"link", "from", "weights"});
        } else {
          rd.keys(a[i], p, {"link", "from"});
        }
        LinkWeightsConfig lw;
        const auto link = rd.ints(rd.req(a[i], p, "link"), p + "/link");
        if (link.size() != 2) rd.fail(p + "/link", "a link is [u, v]");
        lw.link = {link[0], link[1]};
        lw.from = rd.ints(rd.req(a[i], p, "from"), p + "/from");
        if (with_weights) {
          lw.weights = rd.nums(rd.req(a[i], p, "weights"), p + "/weights");
          if (lw.weights.size() != lw.from.size()) rd.fail(p + "/weights", "one weight per entry of \"from\"");
        }
        out.push_back(std::move(lw));
      }
      return out;
    };
    r.cpf_weights = read_links("weights", true);
    r.priority = read_links("orders", false);
  }
  if (!kinds.contains(r.kind)) rd.fail(ptr, "rule must be one of dpf, cpf, priority, cooperative");
  return r;
}

ScenarioConfig read_config(const Reader& rd, const json& root) {
  ScenarioConfig c;
  rd.keys(root, "", {"schema", "name", "seed", "variant", "variants", "design", "synthetic", "cell_types", "network",
                     "signals", "environment", "run", "evaluation", "learning"});
  c.schema = static_cast<int>(rd.integer(rd.req(root, "", "schema"), "/schema"));
  if (c.schema != kSchemaVersion) rd.fail("/schema", "unsupported schema version " + std::to_string(c.schema));
  if (root.contains("name")) c.name = rd.str(root.at("name"), "/name");
  if (root.contains("seed")) {
    const auto& s = root.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      rd.fail("/seed", "seed must be a non-negative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }
  if (root.contains("variant")) c.variant = rd.str(root.at("variant"), "/variant");

  // design
  std::set<std::string> names;
  if (root.contains("design")) {
    const auto& a = rd.arr(root.at("design"), "/design");
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string p = "/design/" + std::to_string(i);
      rd.keys(a[i], p, {"name", "lower", "upper", "value", "integer"});
      DesignDim d;
      d.name = rd.str(rd.req(a[i], p, "name"), p + "/name");
      d.lower = rd.num(rd.req(a[i], p, "lower"), p + "/lower");
      d.upper = rd.num(rd.req(a[i], p, "upper"), p + "/upper");
      d.value = rd.num(a[i], p, "value", 0.5 * (d.lower + d.upper));
      if (a[i].contains("integer")) d.integer = rd.boolean(a[i].at("integer"), p + "/integer");
      if (!(d.lower < d.upper)) rd.fail(p, "design bounds need lower < upper");
      if (!names.insert(d.name).second) rd.fail(p + "/name", "duplicate design parameter \"" + d.name + "\"");
      c.design.push_back(std::move(d));
    }
  }

  if (root.contains("synthetic")) {
    const auto& s = root.at("synthetic");
    rd.keys(s, "/synthetic", {"function", "noise"});
    SyntheticConfig sc;
    sc.function = rd.str(rd.req(s, "/synthetic", "function"), "/synthetic/function");
    if (sc.function != "sin_product" && sc.function != "sin") {
      rd.fail("/synthetic/function", "synthetic function must be sin_product or sin");
    }
    sc.noise = rd.num(s, "/synthetic", "noise", 0.01);
    if (!(sc.noise >= 0)) rd.fail("/synthetic/noise", "noise must be >= 0");
    const std::size_t dim = sc.function == "sin" ? 1 : 2;
    if (c.design.size() != dim) rd.fail("/design", "synthetic function needs " + std::to_string(dim) + " design dimensions");
    c.synthetic = sc;
  }

  // cell types
  std::set<std::string> type_names;
  if (root.contains("cell_types")) {
    const auto& obj = root.at("cell_types");
    if (!obj.is_object()) rd.fail("/cell_types", "expected an object of named cell types");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      const std::string p = "/cell_types/" + escape_token(it.key());
      rd.keys(*it, p, {"kind", "s_max", "rho_max", "a", "b", "c", "d", "zeta", "approach_capacity", "length"});
      CellTypeConfig t;
      t.name = it.key();
      const std::string kind = rd.str(rd.req(*it, p, "kind"), p + "/kind");
      const auto k = parse_cell_kind(kind);
      if (!k) rd.fail(p + "/kind", "unknown cell kind \"" + kind + "\"");
      t.kind = *k;
      t.params = read_cell_params(rd, *it, p, t.kind);
      t.length = rd.num(*it, p, "length", 1.0);
      if (!(t.length > 0)) rd.fail(p + "/length", "length must be > 0");
      type_names.insert(t.name);
      c.cell_types.push_back(std::move(t));
    }
  }

  // network
  std::set<int> node_ids;
  if (root.contains("network")) {
    const auto& net = root.at("network");
    rd.keys(net, "/network", {"nodes", "turning"});
    const auto& nodes = rd.arr(rd.req(net, "/network", "nodes"), "/network/nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const std::string p = "/network/nodes/" + std::to_string(i);
      rd.keys(nodes[i], p, {"id", "type", "arms", "exits", "length", "allow_uturn"});
      NodeConfig n;
      n.id = static_cast<int>(rd.integer(rd.req(nodes[i], p, "id"), p + "/id"));
      n.type = rd.str(rd.req(nodes[i], p, "type"), p + "/type");
      if (!type_names.contains(n.type)) rd.fail(p + "/type", "unknown cell type \"" + n.type + "\"");
      n.arms = rd.ints(rd.req(nodes[i], p, "arms"), p + "/arms");
      if (nodes[i].contains("exits")) n.exits = rd.ints(nodes[i].at("exits"), p + "/exits");
      if (nodes[i].contains("length")) n.length = rd.num(nodes[i].at("length"), p + "/length");
      if (nodes[i].contains("allow_uturn")) n.allow_uturn = rd.boolean(nodes[i].at("allow_uturn"), p + "/allow_uturn");
      if (!node_ids.insert(n.id).second) rd.fail(p + "/id", "duplicate node id " + std::to_string(n.id));
      c.nodes.push_back(std::move(n));
    }
    for (std::size_t i = 0; i < c.nodes.size(); ++i) {
      for (std::size_t a = 0; a < c.nodes[i].arms.size(); ++a) {
        if (!node_ids.contains(c.nodes[i].arms[a])) {
          rd.fail("/network/nodes/" + std::to_string(i) + "/arms/" + std::to_string(a),
                  "arm references unknown node " + std::to_string(c.nodes[i].arms[a]));
        }
      }
    }
    if (net.contains("turning")) {
      const auto& t = net.at("turning");
      if (t.is_string()) {
        c.turning = t.get<std::string>();
        if (c.turning != "uniform") rd.fail("/network/turning", "turning must be \"uniform\" or a table");
      } else {
        c.turning = "table";
        const auto& a = rd.arr(t, "/network/turning");
        for (std::size_t i = 0; i < a.size(); ++i) {
          const std::string p = "/network/turning/" + std::to_string(i);
          rd.keys(a[i], p, {"route", "to", "fraction"});
          TurningEntryConfig e;
          e.route = rd.route(rd.req(a[i], p, "route"), p + "/route");
          e.to = static_cast<int>(rd.integer(rd.req(a[i], p, "to"), p + "/to"));
          e.fraction = rd.num(rd.req(a[i], p, "fraction"), p + "/fraction");
          c.turning_table.push_back(e);
        }
      }
    }
  } else if (!c.synthetic) {
    rd.fail("", "missing required key \"network\" (or \"synthetic\")");
  }

  // signals
  if (root.contains("signals")) {
    const auto& a = rd.arr(root.at("signals"), "/signals");
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string p = "/signals/" + std::to_string(i);
      rd.keys(a[i], p, {"node", "green", "shift", "axis_i", "axis_j", "a_real", "t_safe", "v_real"});
      SignalConfig s;
      s.node = static_cast<int>(rd.integer(rd.req(a[i], p, "node"), p + "/node"));
      if (!node_ids.contains(s.node)) rd.fail(p + "/node", "unknown node " + std::to_string(s.node));
      s.green = rd.param(rd.req(a[i], p, "green"), p + "/green", names);
      if (a[i].contains("shift")) s.shift = rd.param(a[i].at("shift"), p + "/shift", names);
      s.axis_i = rd.ints(rd.req(a[i], p, "axis_i"), p + "/axis_i");
      s.axis_j = rd.ints(rd.req(a[i], p, "axis_j"), p + "/axis_j");
      s.a_real = rd.num(a[i], p, "a_real", s.a_real);
      s.t_safe = rd.num(a[i], p, "t_safe", s.t_safe);
      s.v_real = rd.num(a[i], p, "v_real", s.v_real);
      c.signals.push_back(std::move(s));
    }
  }

  // environment
  if (root.contains("environment")) {
    const auto& env = root.at("environment");
    rd.keys(env, "/environment", {"copula", "sources"});
    if (env.contains("copula")) {
      rd.keys(env.at("copula"), "/environment/copula", {"r"});
      c.copula_r = rd.param(rd.req(env.at("copula"), "/environment/copula", "r"), "/environment/copula/r", names);
    }
    if (env.contains("sources")) {
      const auto& a = rd.arr(env.at("sources"), "/environment/sources");
      static const std::set<std::string> kinds{"random_walk", "gaussian", "copy", "constant"};
      for (std::size_t i = 0; i < a.size(); ++i) {
        const std::string p = "/environment/sources/" + std::to_string(i);
        rd.keys(a[i], p, {"kind", "route", "cap", "sigma", "copula_slot", "mean", "cv", "value", "of", "scale"});
        SourceConfig s;
        s.kind = rd.str(rd.req(a[i], p, "kind"), p + "/kind");
        if (!kinds.contains(s.kind)) rd.fail(p + "/kind", "source kind must be random_walk, gaussian, copy or constant");
        s.route = rd.route(rd.req(a[i], p, "route"), p + "/route");
        if (a[i].contains("cap")) {
          s.cap = rd.str(a[i].at("cap"), p + "/cap");
          if (s.cap != "rho_max" && s.cap != "half_rho_max") rd.fail(p + "/cap", "cap must be rho_max or half_rho_max");
        }
        if (a[i].contains("sigma")) s.sigma = rd.param(a[i].at("sigma"), p + "/sigma", names);
        if (a[i].contains("copula_slot")) {
          s.copula_slot = static_cast<int>(rd.integer(a[i].at("copula_slot"), p + "/copula_slot"));
          if (s.copula_slot < -1 || s.copula_slot > 1) rd.fail(p + "/copula_slot", "copula slot must be 0 or 1");
          if (s.copula_slot >= 0 && !c.copula_r) rd.fail(p + "/copula_slot", "copula slot without a copula");
        }
        if (a[i].contains("mean")) s.mean = rd.param(a[i].at("mean"), p + "/mean", names);
        if (a[i].contains("cv")) s.cv = rd.param(a[i].at("cv"), p + "/cv", names);
        if (a[i].contains("value")) s.value = rd.param(a[i].at("value"), p + "/value", names);
        if (a[i].contains("of")) s.of = rd.route(a[i].at("of"), p + "/of");
        s.scale = rd.num(a[i], p, "scale", 1.0);
        if (s.kind == "copy" && !s.of) rd.fail(p, "copy sources need \"of\"");
        c.sources.push_back(std::move(s));
      }
    }
  }

  // run
  if (root.contains("run")) {
    const auto& r = root.at("run");
    rd.keys(r, "/run", {"steps", "t_real", "rule", "initial"});
    c.run.steps = rd.integer(rd.req(r, "/run", "steps"), "/run/steps");
    if (c.run.steps < 1) rd.fail("/run/steps", "steps must be >= 1");
    c.run.t_real = rd.num(r, "/run", "t_real", 1.0);
    if (!(c.run.t_real > 0)) rd.fail("/run/t_real", "t_real must be > 0");
    if (r.contains("rule")) c.run.rule = read_rule(rd, r.at("rule"), "/run/rule");
    if (r.contains("initial")) {
      const auto& in = r.at("initial");
      if (in.is_number()) {
        c.run.initial.mode = "value";
        c.run.initial.value = rd.num(in, "/run/initial");
      } else {
        rd.keys(in, "/run/initial", {"per_type", "fill_fraction"});
        if (in.contains("per_type") == in.contains("fill_fraction")) {
          rd.fail("/run/initial", "give exactly one of per_type or fill_fraction");
        }
        if (in.contains("per_type")) {
          c.run.initial.mode = "per_type";
          const auto& pt = in.at("per_type");
          if (!pt.is_object()) rd.fail("/run/initial/per_type", "expected an object");
          for (auto it = pt.begin(); it != pt.end(); ++it) {
            const std::string p = "/run/initial/per_type/" + escape_token(it.key());
            if (!type_names.contains(it.key())) rd.fail(p, "unknown cell type \"" + it.key() + "\"");
            c.run.initial.per_type[it.key()] = rd.num(*it, p);
          }
        } else {
          c.run.initial.mode = "fill_fraction";
          c.run.initial.value = rd.num(in.at("fill_fraction"), "/run/initial/fill_fraction");
        }
      }
      if (c.run.initial.value < 0) rd.fail("/run/initial", "initial densities must be >= 0");
    }
  }

  // evaluation
  if (root.contains("evaluation")) {
    const auto& e = root.at("evaluation");
    rd.keys(e, "/evaluation", {"measure", "utility", "benchmark", "gamma", "level"});
    if (e.contains("measure")) {
      const auto& m = e.at("measure");
      if (m.is_string()) {
        c.evaluation.measure.kind = m.get<std::string>();
      } else {
        rd.keys(m, "/evaluation/measure", {"kind", "routes"});
        c.evaluation.measure.kind = rd.str(rd.req(m, "/evaluation/measure", "kind"), "/evaluation/measure/kind");
        if (m.contains("routes")) {
          const auto& a = rd.arr(m.at("routes"), "/evaluation/measure/routes");
          for (std::size_t i = 0; i < a.size(); ++i) {
            c.evaluation.measure.routes.push_back(rd.route(a[i], "/evaluation/measure/routes/" + std::to_string(i)));
          }
        }
      }
      const auto& k = c.evaluation.measure.kind;
      if (k != "Q" && k != "Qa" && k != "Qb") rd.fail("/evaluation/measure", "measure must be Q, Qa or Qb");
      if (k == "Qb" && c.evaluation.measure.routes.size() != 2) {
        rd.fail("/evaluation/measure", "Qb needs exactly two routes");
      }
    }
    if (e.contains("utility")) {
      const auto& u = e.at("utility");
      std::string kind;
      if (u.is_string()) {
        kind = u.get<std::string>();
      } else {
        rd.keys(u, "/evaluation/utility", {"kind", "c", "alpha"});
        kind = rd.str(rd.req(u, "/evaluation/utility", "kind"), "/evaluation/utility/kind");
        c.evaluation.utility.c = rd.num(u, "/evaluation/utility", "c", 0.0);
        c.evaluation.utility.alpha = rd.num(u, "/evaluation/utility", "alpha", 1.0);
      }
      const auto k = parse_utility_kind(kind);
      if (!k) rd.fail("/evaluation/utility", "unknown utility \"" + kind + "\"");
      c.evaluation.utility.kind = *k;
      try {
        c.evaluation.utility.validate();
      } catch (const ConfigError& ex) {
        rd.fail("/evaluation/utility", ex.what());
      }
    }
    if (e.contains("benchmark")) {
      const auto& a = rd.arr(e.at("benchmark"), "/evaluation/benchmark");
      for (std::size_t i = 0; i < a.size(); ++i) {
        const std::string p = "/evaluation/benchmark/" + std::to_string(i);
        rd.keys(a[i], p, {"name", "e", "sigma"});
        BenchmarkLevel b;
        b.name = rd.str(rd.req(a[i], p, "name"), p + "/name");
        b.e = rd.num(rd.req(a[i], p, "e"), p + "/e");
        b.sigma = rd.num(rd.req(a[i], p, "sigma"), p + "/sigma");
        if (!(b.e > 0)) rd.fail(p + "/e", "benchmark expectation must be > 0");
        if (!(b.sigma > 0 && b.sigma < 0.5)) rd.fail(p + "/sigma", "benchmark sigma must lie in (0, 1/2)");
        c.evaluation.benchmark.push_back(std::move(b));
      }
    }
    if (e.contains("gamma")) c.evaluation.gamma = rd.num(e.at("gamma"), "/evaluation/gamma");
    if (e.contains("level")) {
      c.evaluation.level = rd.str(e.at("level"), "/evaluation/level");
      const auto& b = c.evaluation.benchmark;
      if (std::none_of(b.begin(), b.end(), [&](const BenchmarkLevel& l) { return l.name == c.evaluation.level; })) {
        rd.fail("/evaluation/level", "unknown benchmark level \"" + c.evaluation.level + "\"");
      }
    }
  }

  // learning
  if (root.contains("learning")) {
    const auto& l = root.at("learning");
    const std::string p = "/learning";
    rd.keys(l, p, {"vary", "kernel", "n_initial", "n_loop", "iterations", "tau", "tau_scale", "n_min", "n_max", "c1",
                   "c2_0", "c3", "acquisition", "max_trials", "delta", "n_eval", "error_stop", "grid", "fit_starts"});
    auto& L = c.learning;
    if (l.contains("vary")) {
      const auto& a = rd.arr(l.at("vary"), p + "/vary");
      for (std::size_t i = 0; i < a.size(); ++i) {
        const std::string name = rd.str(a[i], p + "/vary/" + std::to_string(i));
        if (!names.contains(name)) rd.fail(p + "/vary/" + std::to_string(i), "unknown design parameter \"" + name + "\"");
        L.vary.push_back(name);
      }
    }
    if (l.contains("kernel")) {
      L.kernel = rd.str(l.at("kernel"), p + "/kernel");
      if (L.kernel != "se" && L.kernel != "matern12" && L.kernel != "matern32" && L.kernel != "matern52") {
        rd.fail(p + "/kernel", "kernel must be se, matern12, matern32 or matern52");
      }
    }
    L.n_initial = rd.count(l, p, "n_initial", L.n_initial);
    L.n_loop = rd.count(l, p, "n_loop", L.n_loop);
    L.iterations = rd.count(l, p, "iterations", L.iterations);
    if (l.contains("tau")) L.tau = rd.nums(l.at("tau"), p + "/tau");
    if (l.contains("tau_scale")) L.tau_scale = rd.num(l.at("tau_scale"), p + "/tau_scale");
    L.n_min = rd.count(l, p, "n_min", L.n_min);
    if (l.contains("n_max")) {
      L.n_max.clear();
      const auto& a = rd.arr(l.at("n_max"), p + "/n_max");
      for (std::size_t i = 0; i < a.size(); ++i) L.n_max.push_back(rd.count(a[i], p + "/n_max/" + std::to_string(i)));
    }
    L.c1 = rd.num(l, p, "c1", L.c1);
    if (l.contains("c2_0")) L.c2_0 = rd.num(l.at("c2_0"), p + "/c2_0");
    L.c3 = rd.num(l, p, "c3", L.c3);
    if (l.contains("acquisition")) {
      L.acquisition = rd.str(l.at("acquisition"), p + "/acquisition");
      if (L.acquisition != "distance" && L.acquisition != "scaled") {
        rd.fail(p + "/acquisition", "acquisition must be distance or scaled");
      }
    }
    L.max_trials = rd.count(l, p, "max_trials", L.max_trials);
    L.delta = rd.num(l, p, "delta", L.delta);
    L.n_eval = rd.count(l, p, "n_eval", L.n_eval);
    if (l.contains("error_stop")) L.error_stop = rd.num(l.at("error_stop"), p + "/error_stop");
    L.grid = rd.count(l, p, "grid", L.grid);
    L.fit_starts = rd.count(l, p, "fit_starts", L.fit_starts);

    if (L.n_initial < 1 || L.n_loop < 1) rd.fail(p, "point budgets must be >= 1");
    if (L.tau.empty()) rd.fail(p + "/tau", "tau schedule must not be empty");
    for (double t : L.tau) {
      if (!(t > 0)) rd.fail(p + "/tau", "tau values must be > 0");
    }
    if (L.n_max.empty()) rd.fail(p + "/n_max", "n_max schedule must not be empty");
    for (std::size_t n : L.n_max) {
      if (n < L.n_min) rd.fail(p + "/n_max", "n_max values must be >= n_min");
    }
    if (L.n_min < 2) rd.fail(p + "/n_min", "n_min must be >= 2");
    if (!(L.c1 > 1)) rd.fail(p + "/c1", "c1 must be > 1");
    if (L.c2_0 && !(*L.c2_0 > 0)) rd.fail(p + "/c2_0", "c2_0 must be > 0");
    if (!(L.delta > 0 && L.delta < 1)) rd.fail(p + "/delta", "delta must lie in (0, 1)");
    if (L.n_eval < 1) rd.fail(p + "/n_eval", "n_eval must be >= 1");
    if (L.tau_scale && !(*L.tau_scale > 0)) rd.fail(p + "/tau_scale", "tau_scale must be > 0");
    if (L.grid < 2) rd.fail(p + "/grid", "grid must be >= 2");
  }
  return c;
}

}  // namespace

std::size_t ScenarioConfig::design_index(std::string_view n) const {
  for (std::size_t i = 0; i < design.size(); ++i) {
    if (design[i].name == n) return i;
  }
  throw ConfigError("unknown design parameter \"" + std::string(n) + "\"");
}

ScenarioConfig parse_config(std::string_view text, std::string_view variant) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    int line = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t i = 0; i + 1 < upto; ++i) {
      if (text[i] == '\n') ++line;
    }
    throw ConfigError(std::string("malformed JSON: ") + e.what(), line);
  }
  auto lines = json_pointer_lines(text);
  std::string chosen(variant);
  if (chosen.empty() && root.is_object() && root.contains("variant") && root.at("variant").is_string()) {
    chosen = root.at("variant").get<std::string>();
  }
  std::string prefix;
  if (!chosen.empty()) {
    if (!root.contains("variants") || !root.at("variants").is_object() || !root.at("variants").contains(chosen)) {
      throw ConfigError("unknown variant \"" + chosen + "\"", lines.count("/variant") ? lines.at("/variant") : 0);
    }
    const json patch = root.at("variants").at(chosen);
    root.erase("variants");
    root.merge_patch(patch);
    root["variant"] = chosen;
    prefix = "/variants/" + escape_token(chosen);
  } else if (root.is_object()) {
    root.erase("variants");
  }
  Reader rd(std::move(lines), prefix);
  return read_config(rd, root);
}

ScenarioConfig load_config(const std::filesystem::path& path, std::string_view variant) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), variant);
}

// ---- writing ----------------------------------------------------------------

namespace {

json param_json(const ParamRef& p) {
  if (p.is_constant()) return p.value;
  if (p.scale == 1.0) return p.design;
  return json{{"design", p.design}, {"scale", p.scale}};
}

json links_json(const std::vector<LinkWeightsConfig>& v, bool weights) {
  json a = json::array();
  for (const auto& lw : v) {
    json o{{"link", lw.link}, {"from", lw.from}};
    if (weights) o["weights"] = lw.weights;
    a.push_back(o);
  }
  return a;
}

}  // namespace

json to_json(const ScenarioConfig& c) {
  json j;
  j["schema"] = c.schema;
  j["name"] = c.name;
  j["seed"] = c.seed;
  if (!c.variant.empty()) {
    // Keep the choice visible without the patch set: an empty patch of that name.
    j["variant"] = c.variant;
    j["variants"] = json{{c.variant, json::object()}};
  }
  j["design"] = json::array();
  for (const auto& d : c.design) {
    j["design"].push_back({{"name", d.name}, {"lower", d.lower}, {"upper", d.upper}, {"value", d.value},
                           {"integer", d.integer}});
  }
  if (c.synthetic) j["synthetic"] = {{"function", c.synthetic->function}, {"noise", c.synthetic->noise}};
  if (!c.cell_types.empty()) {
    json types = json::object();
    for (const auto& t : c.cell_types) {
      const auto& p = t.params;
      json o{{"kind", std::string(to_string(t.kind))}, {"s_max", p.s_max}, {"rho_max", p.rho_max}, {"a", p.a},
             {"b", p.b}, {"c", p.c}, {"d", p.d}, {"zeta", p.zeta}, {"length", t.length}};
      if (!p.approach_capacity.empty()) o["approach_capacity"] = p.approach_capacity;
      types[t.name] = o;
    }
    j["cell_types"] = types;
  }
  if (!c.nodes.empty()) {
    json nodes = json::array();
    for (const auto& n : c.nodes) {
      json o{{"id", n.id}, {"type", n.type}, {"arms", n.arms}};
      if (!n.exits.empty()) o["exits"] = n.exits;
      if (n.length) o["length"] = *n.length;
      if (n.allow_uturn) o["allow_uturn"] = true;
      nodes.push_back(o);
    }
    json net{{"nodes", nodes}};
    if (c.turning == "uniform") {
      net["turning"] = "uniform";
    } else {
      json t = json::array();
      for (const auto& e : c.turning_table) t.push_back({{"route", e.route}, {"to", e.to}, {"fraction", e.fraction}});
      net["turning"] = t;
    }
    j["network"] = net;
  }
  if (!c.signals.empty()) {
    json a = json::array();
    for (const auto& s : c.signals) {
      a.push_back({{"node", s.node}, {"green", param_json(s.green)}, {"shift", param_json(s.shift)},
                   {"axis_i", s.axis_i}, {"axis_j", s.axis_j}, {"a_real", s.a_real}, {"t_safe", s.t_safe},
                   {"v_real", s.v_real}});
    }
    j["signals"] = a;
  }
  if (c.copula_r || !c.sources.empty()) {
    json env = json::object();
    if (c.copula_r) env["copula"] = {{"r", param_json(*c.copula_r)}};
    json a = json::array();
    for (const auto& s : c.sources) {
      json o{{"kind", s.kind}, {"route", s.route}, {"cap", s.cap}};
      if (s.kind == "random_walk") {
        o["sigma"] = param_json(s.sigma);
        if (s.copula_slot >= 0) o["copula_slot"] = s.copula_slot;
      } else if (s.kind == "gaussian") {
        o["mean"] = param_json(s.mean);
        o["cv"] = param_json(s.cv);
      } else if (s.kind == "copy") {
        o["of"] = *s.of;
        o["scale"] = s.scale;
      } else {
        o["value"] = param_json(s.value);
      }
      a.push_back(o);
    }
    env["sources"] = a;
    j["environment"] = env;
  }
  {
    json run{{"steps", c.run.steps}, {"t_real", c.run.t_real}};
    const auto& r = c.run.rule;
    if (r.cpf_weights.empty() && r.priority.empty()) {
      run["rule"] = r.kind;
    } else {
      json o{{"kind", r.kind}};
      if (!r.cpf_weights.empty()) o["weights"] = links_json(r.cpf_weights, true);
      if (!r.priority.empty()) o["orders"] = links_json(r.priority, false);
      run["rule"] = o;
    }
    const auto& in = c.run.initial;
    if (in.mode == "value") {
      run["initial"] = in.value;
    } else if (in.mode == "per_type") {
      run["initial"] = {{"per_type", in.per_type}};
    } else {
      run["initial"] = {{"fill_fraction", in.value}};
    }
    j["run"] = run;
  }
  {
    json e;
    const auto& m = c.evaluation.measure;
    if (m.routes.empty()) {
      e["measure"] = m.kind;
    } else {
      e["measure"] = {{"kind", m.kind}, {"routes", m.routes}};
    }
    const auto& u = c.evaluation.utility;
    e["utility"] = {{"kind", std::string(to_string(u.kind))}, {"c", u.c}, {"alpha", u.alpha}};
    json b = json::array();
    for (const auto& l : c.evaluation.benchmark) b.push_back({{"name", l.name}, {"e", l.e}, {"sigma", l.sigma}});
    e["benchmark"] = b;
    if (c.evaluation.gamma) e["gamma"] = *c.evaluation.gamma;
    if (!c.evaluation.level.empty()) e["level"] = c.evaluation.level;
    j["evaluation"] = e;
  }
  {
    const auto& L = c.learning;
    json l{{"vary", L.vary},           {"kernel", L.kernel},   {"n_initial", L.n_initial},
           {"n_loop", L.n_loop},       {"iterations", L.iterations}, {"tau", L.tau},
           {"n_min", L.n_min},         {"n_max", L.n_max},     {"c1", L.c1},
           {"c3", L.c3},               {"acquisition", L.acquisition}, {"max_trials", L.max_trials},
           {"delta", L.delta},         {"n_eval", L.n_eval},   {"grid", L.grid},
           {"fit_starts", L.fit_starts}};
    if (L.tau_scale) l["tau_scale"] = *L.tau_scale;
    if (L.c2_0) l["c2_0"] = *L.c2_0;
    if (L.error_stop) l["error_stop"] = *L.error_stop;
    j["learning"] = l;
  }
  return j;
}

std::uint64_t config_hash(const ScenarioConfig& config) {
  const std::string s = to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace sctm
