#pragma once

// Scenario files (JSON, schema in docs/scenario.md). Errors carry the file
// name, the line of the offending value and its JSON pointer.

#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "qnet/scenario.hpp"

namespace qnet {

namespace detail {

/// Finds the text offset of the value addressed by a JSON pointer by walking
/// the raw document. Returns the offset of the deepest value reached.
class JsonLocator {
 public:
  explicit JsonLocator(std::string_view text) : s_(text) {}

  std::size_t line_of(const std::string& pointer) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < pointer.size()) {
      if (pointer[i] != '/') break;
      std::size_t j = pointer.find('/', i + 1);
      if (j == std::string::npos) j = pointer.size();
      std::string tok = pointer.substr(i + 1, j - i - 1);
      for (std::size_t p; (p = tok.find("~1")) != std::string::npos;) tok.replace(p, 2, "/");
      for (std::size_t p; (p = tok.find("~0")) != std::string::npos;) tok.replace(p, 2, "~");
      tokens.push_back(tok);
      i = j;
    }
    pos_ = 0;
    skip_ws();
    std::size_t found = pos_;
    for (const auto& tok : tokens) {
      if (!descend(tok)) break;
      found = pos_;
    }
    std::size_t line = 1;
    for (std::size_t k = 0; k < found && k < s_.size(); ++k) line += s_[k] == '\n';
    return line;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\n' || s_[pos_] == '\r' || s_[pos_] == '\t')) ++pos_;
  }

  std::string read_string() {
    std::string out;
    ++pos_;  // opening quote
    while (pos_ < s_.size() && s_[pos_] != '"') {
      if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) {
        out += s_[pos_ + 1];
        pos_ += 2;
      } else {
        out += s_[pos_++];
      }
    }
    ++pos_;
    return out;
  }

  void skip_value() {
    skip_ws();
    if (pos_ >= s_.size()) return;
    const char c = s_[pos_];
    if (c == '"') {
      read_string();
    } else if (c == '{' || c == '[') {
      int depth = 0;
      while (pos_ < s_.size()) {
        const char d = s_[pos_];
        if (d == '"') {
          read_string();
          continue;
        }
        if (d == '{' || d == '[') ++depth;
        if (d == '}' || d == ']') {
          if (--depth == 0) {
            ++pos_;
            return;
          }
        }
        ++pos_;
      }
    } else {
      while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != '}' && s_[pos_] != ']') ++pos_;
    }
  }

  // Moves pos_ to the child `tok` of the value at pos_; false if absent.
  bool descend(const std::string& tok) {
    skip_ws();
    if (pos_ >= s_.size()) return false;
    const std::size_t start = pos_;
    if (s_[pos_] == '{') {
      ++pos_;
      while (true) {
        skip_ws();
        if (pos_ >= s_.size() || s_[pos_] != '"') break;
        const std::string key = read_string();
        skip_ws();
        ++pos_;  // colon
        skip_ws();
        if (key == tok) return true;
        skip_value();
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == ',') ++pos_;
      }
    } else if (s_[pos_] == '[') {
      std::size_t want = 0;
      try {
        want = std::stoul(tok);
      } catch (...) {
        pos_ = start;
        return false;
      }
      ++pos_;
      for (std::size_t idx = 0;; ++idx) {
        skip_ws();
        if (pos_ >= s_.size() || s_[pos_] == ']') break;
        if (idx == want) return true;
        skip_value();
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == ',') ++pos_;
      }
    }
    pos_ = start;
    return false;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

class ScenarioReader {
 public:
  ScenarioReader(std::string_view text, std::string source) : text_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& pointer, const std::string& msg) const {
    JsonLocator loc(text_);
    throw ScenarioError(source_ + ":" + std::to_string(loc.line_of(pointer)) + ": " + msg + " (at " +
                        (pointer.empty() ? "/" : pointer) + ")");
  }

  const nlohmann::json& require(const nlohmann::json& obj, const std::string& ptr, const char* key) const {
    if (!obj.contains(key)) fail(ptr, std::string("missing required field '") + key + "'");
    return obj.at(key);
  }

  void only_keys(const nlohmann::json& obj, const std::string& ptr, std::initializer_list<const char*> keys) const {
    if (!obj.is_object()) fail(ptr, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool ok = false;
      for (const char* k : keys) ok = ok || it.key() == k;
      if (!ok) fail(ptr + "/" + it.key(), "unknown field '" + it.key() + "'");
    }
  }

  double number(const nlohmann::json& v, const std::string& ptr) const {
    if (!v.is_number()) fail(ptr, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(ptr, "number is not finite");
    return d;
  }

  std::size_t count(const nlohmann::json& v, const std::string& ptr) const {
    if (!v.is_number_integer() || v.get<long long>() < 0) fail(ptr, "expected a non-negative integer");
    return static_cast<std::size_t>(v.get<long long>());
  }

  std::vector<double> vec(const nlohmann::json& v, const std::string& ptr, std::size_t expect,
                          bool check_len = true) const {
    if (!v.is_array()) fail(ptr, "expected an array of numbers");
    if (check_len && v.size() != expect)
      fail(ptr, "expected " + std::to_string(expect) + " entries, found " + std::to_string(v.size()));
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], ptr + "/" + std::to_string(i)));
    return out;
  }

  std::string text(const nlohmann::json& v, const std::string& ptr) const {
    if (!v.is_string()) fail(ptr, "expected a string");
    return v.get<std::string>();
  }

  Scenario read() const {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text_);
    } catch (const nlohmann::json::parse_error& e) {
      std::size_t line = 1;
      for (std::size_t k = 0; k < e.byte && k < text_.size(); ++k) line += text_[k] == '\n';
      throw ScenarioError(source_ + ":" + std::to_string(line) + ": invalid JSON: " + e.what());
    }
    only_keys(doc, "", {"name", "queues", "attributes", "omega", "actions", "cost", "constraints", "arrivals",
                        "routing"});
    Scenario s;
    if (doc.contains("name")) s.name = text(doc["name"], "/name");
    s.n_queues = count(require(doc, "", "queues"), "/queues");
    if (s.n_queues == 0) fail("/queues", "need at least one queue");
    s.n_attributes = doc.contains("attributes") ? count(doc["attributes"], "/attributes") : 0;
    const std::size_t K = s.n_queues, M = s.n_attributes;

    // Network-state chain.
    const auto& om = require(doc, "", "omega");
    only_keys(om, "/omega", {"states", "transition", "iid", "initial"});
    const auto& states = require(om, "/omega", "states");
    if (!states.is_array() || states.empty()) fail("/omega/states", "expected a non-empty array of state names");
    for (std::size_t i = 0; i < states.size(); ++i)
      s.omega_names.push_back(text(states[i], "/omega/states/" + std::to_string(i)));
    const std::size_t W = s.omega_names.size();
    if (om.contains("transition") == om.contains("iid"))
      fail("/omega", "give exactly one of 'transition' or 'iid'");
    std::vector<std::vector<double>> P;
    std::string chain_ptr;
    if (om.contains("transition")) {
      chain_ptr = "/omega/transition";
      const auto& tr = om["transition"];
      if (!tr.is_array() || tr.size() != W) fail(chain_ptr, "expected " + std::to_string(W) + " rows");
      for (std::size_t i = 0; i < W; ++i) P.push_back(vec(tr[i], chain_ptr + "/" + std::to_string(i), W));
    } else {
      chain_ptr = "/omega/iid";
      P.assign(W, vec(om["iid"], chain_ptr, W));
    }
    std::vector<double> init;
    if (om.contains("initial")) init = vec(om["initial"], "/omega/initial", W);
    try {
      s.chain = FiniteMarkovChain(P, init);
      require_irreducible(s.chain);
    } catch (const ChainError& e) {
      fail(chain_ptr, e.what());
    }

    // Action tables.
    const auto& acts = require(doc, "", "actions");
    if (!acts.is_array() || acts.size() != W)
      fail("/actions", "expected one action list per network state (" + std::to_string(W) + ")");
    s.actions.resize(W);
    for (std::size_t w = 0; w < W; ++w) {
      const std::string wp = "/actions/" + std::to_string(w);
      if (!acts[w].is_array() || acts[w].empty()) fail(wp, "expected a non-empty array of actions");
      for (std::size_t a = 0; a < acts[w].size(); ++a) {
        const std::string ap = wp + "/" + std::to_string(a);
        const auto& js = acts[w][a];
        only_keys(js, ap, {"name", "y", "b", "x"});
        Action act;
        act.name = js.contains("name") ? text(js["name"], ap + "/name") : "a" + std::to_string(a);
        act.y = js.contains("y") ? vec(js["y"], ap + "/y", K) : std::vector<double>(K, 0.0);
        act.b = js.contains("b") ? vec(js["b"], ap + "/b", K) : std::vector<double>(K, 0.0);
        act.x = js.contains("x") ? vec(js["x"], ap + "/x", M) : std::vector<double>(M, 0.0);
        for (std::size_t k = 0; k < K; ++k) {
          if (act.y[k] < 0.0) fail(ap + "/y/" + std::to_string(k), "y must be non-negative");
          if (act.b[k] < 0.0) fail(ap + "/b/" + std::to_string(k), "b must be non-negative");
        }
        s.actions[w].push_back(std::move(act));
      }
    }

    // Cost and constraints.
    s.cost.c.assign(M, 0.0);
    if (doc.contains("cost")) {
      const auto& c = doc["cost"];
      only_keys(c, "/cost", {"c0", "c"});
      if (c.contains("c0")) s.cost.c0 = number(c["c0"], "/cost/c0");
      if (c.contains("c")) s.cost.c = vec(c["c"], "/cost/c", M);
    }
    if (doc.contains("constraints")) {
      const auto& cs = doc["constraints"];
      if (!cs.is_array()) fail("/constraints", "expected an array");
      for (std::size_t l = 0; l < cs.size(); ++l) {
        const std::string lp = "/constraints/" + std::to_string(l);
        only_keys(cs[l], lp, {"d0", "d"});
        AffineFunction g;
        if (cs[l].contains("d0")) g.c0 = number(cs[l]["d0"], lp + "/d0");
        g.c = cs[l].contains("d") ? vec(cs[l]["d"], lp + "/d", M) : std::vector<double>(M, 0.0);
        s.constraints.push_back(std::move(g));
      }
    }

    // Arrivals.
    const auto& arr = require(doc, "", "arrivals");
    if (!arr.is_array() || arr.size() != K) fail("/arrivals", "expected one arrival spec per queue (" + std::to_string(K) + ")");
    for (std::size_t k = 0; k < K; ++k) {
      const std::string kp = "/arrivals/" + std::to_string(k);
      const auto& js = arr[k];
      if (!js.is_object()) fail(kp, "expected an object");
      const std::string kind = text(require(js, kp, "kind"), kp + "/kind");
      try {
        if (kind == "bernoulli") {
          only_keys(js, kp, {"kind", "p", "size", "rate"});
          const double size = js.contains("size") ? number(js["size"], kp + "/size") : 1.0;
          s.arrivals.push_back(ArrivalSpec::bernoulli(number(require(js, kp, "p"), kp + "/p"), size));
        } else if (kind == "deterministic") {
          only_keys(js, kp, {"kind", "sequence", "rate"});
          s.arrivals.push_back(ArrivalSpec::deterministic(vec(require(js, kp, "sequence"), kp + "/sequence", 0, false)));
        } else if (kind == "table") {
          only_keys(js, kp, {"kind", "values", "probs", "rate"});
          auto values = vec(require(js, kp, "values"), kp + "/values", 0, false);
          auto probs = vec(require(js, kp, "probs"), kp + "/probs", values.size());
          s.arrivals.push_back(ArrivalSpec::table(std::move(values), std::move(probs)));
        } else {
          fail(kp + "/kind", "unknown arrival kind '" + kind + "' (expected bernoulli, deterministic or table)");
        }
      } catch (const std::invalid_argument& e) {
        fail(kp, e.what());
      }
      if (js.contains("rate")) {
        const double declared = number(js["rate"], kp + "/rate");
        const double actual = s.arrivals.back().rate();
        if (std::abs(declared - actual) > 1e-9 * std::max(1.0, std::abs(actual)))
          fail(kp + "/rate", "declared rate " + std::to_string(declared) + " differs from the process mean " +
                                 std::to_string(actual));
      }
    }

    // Routing.
    if (doc.contains("routing")) {
      const auto& rt = doc["routing"];
      if (!rt.is_array()) fail("/routing", "expected an array");
      for (std::size_t i = 0; i < rt.size(); ++i) {
        const std::string rp = "/routing/" + std::to_string(i);
        only_keys(rt[i], rp, {"from", "to"});
        Route r{count(require(rt[i], rp, "from"), rp + "/from"), count(require(rt[i], rp, "to"), rp + "/to")};
        if (r.from >= K) fail(rp + "/from", "queue index out of range");
        if (r.to >= K) fail(rp + "/to", "queue index out of range");
        s.routing.push_back(r);
      }
    }

    try {
      validate(s);
    } catch (const ScenarioError& e) {
      fail("", e.what());
    }
    return s;
  }

 private:
  std::string_view text_;
  std::string source_;
};

}  // namespace detail

inline Scenario parse_scenario(std::string_view text, const std::string& source = "<scenario>") {
  return detail::ScenarioReader(text, source).read();
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(path + ": cannot open scenario file");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  return parse_scenario(text, path);
}

}  // namespace qnet
