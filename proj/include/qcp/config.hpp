#pragma once

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "qcp/runner.hpp"

namespace qcp {

// Minimal TOML subset reader: [sections], key = value with strings, numbers,
// booleans, and (nested) arrays. Covers the experiment config format; it is
// not a general TOML implementation.
namespace toml {

struct Parser {
  std::string_view text;
  std::size_t pos = 0;

  bool eof() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }

  void skip_inline_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos;
  }

  void skip_ws_and_comments() {
    while (!eof()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        ++pos;
      } else if (c == '#') {
        while (!eof() && peek() != '\n') ++pos;
      } else {
        break;
      }
    }
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw std::invalid_argument("config parse error at offset " +
                                std::to_string(pos) + ": " + msg);
  }

  nlohmann::json parse_value() {
    skip_inline_ws();
    if (eof()) fail("expected value");
    const char c = peek();
    if (c == '"') return parse_string();
    if (c == '[') return parse_array();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_bool();
    return parse_number();
  }

  nlohmann::json parse_string() {
    ++pos;  // opening quote
    std::string out;
    while (!eof() && peek() != '"') {
      if (peek() == '\\' && pos + 1 < text.size()) ++pos;
      out.push_back(text[pos++]);
    }
    if (eof()) fail("unterminated string");
    ++pos;
    return out;
  }

  nlohmann::json parse_array() {
    ++pos;  // '['
    nlohmann::json arr = nlohmann::json::array();
    while (true) {
      skip_ws_and_comments();
      if (eof()) fail("unterminated array");
      if (peek() == ']') {
        ++pos;
        return arr;
      }
      arr.push_back(parse_value());
      skip_ws_and_comments();
      if (!eof() && peek() == ',') ++pos;
    }
  }

  nlohmann::json parse_bool() {
    if (text.substr(pos, 4) == "true") {
      pos += 4;
      return true;
    }
    if (text.substr(pos, 5) == "false") {
      pos += 5;
      return false;
    }
    fail("expected true/false");
  }

  nlohmann::json parse_number() {
    std::size_t end = pos;
    bool is_float = false;
    while (end < text.size()) {
      const char c = text[end];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-') {
        ++end;
      } else if (c == '.' || c == 'e' || c == 'E') {
        is_float = true;
        ++end;
      } else {
        break;
      }
    }
    if (end == pos) fail("expected number");
    const std::string tok(text.substr(pos, end - pos));
    pos = end;
    try {
      if (is_float) return std::stod(tok);
      return std::stoll(tok);
    } catch (const std::exception&) {
      fail("bad number: " + tok);
    }
  }

  std::string parse_key() {
    std::string key;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) ||
                      peek() == '_' || peek() == '-'))
      key.push_back(text[pos++]);
    if (key.empty()) fail("expected key");
    return key;
  }
};

inline nlohmann::json parse(const std::string& content) {
  Parser p{content};
  nlohmann::json root = nlohmann::json::object();
  nlohmann::json* section = &root;
  while (true) {
    p.skip_ws_and_comments();
    if (p.eof()) break;
    if (p.peek() == '[') {
      ++p.pos;
      const std::string name = p.parse_key();
      p.skip_inline_ws();
      if (p.eof() || p.peek() != ']') p.fail("expected ']'");
      ++p.pos;
      root[name] = nlohmann::json::object();
      section = &root[name];
    } else {
      const std::string key = p.parse_key();
      p.skip_inline_ws();
      if (p.eof() || p.peek() != '=') p.fail("expected '=' after key");
      ++p.pos;
      (*section)[key] = p.parse_value();
    }
  }
  return root;
}

inline nlohmann::json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

} // namespace toml

inline ExperimentConfig config_from_toml(const nlohmann::json& t) {
  ExperimentConfig cfg;
  if (!t.contains("instance"))
    throw std::invalid_argument("config: missing [instance] section");
  const nlohmann::json& inst = t.at("instance");
  if (inst.contains("file")) {
    std::ifstream in(inst.at("file").get<std::string>());
    if (!in)
      throw std::invalid_argument("config: cannot open instance file");
    cfg.instance_spec = nlohmann::json::parse(in);
  } else {
    cfg.instance_spec = inst;
  }

  const nlohmann::json run = t.value("run", nlohmann::json::object());
  cfg.initial_mode = run.value("initial", std::string("uniform_feasible"));
  if (run.contains("family"))
    cfg.family_kinds = run.at("family").get<std::vector<std::string>>();
  cfg.local_gate_count = run.value("local_gate_count", 4);
  const std::string est = run.value("estimation", std::string("exact"));
  if (est == "exact")
    cfg.exact_mode = true;
  else if (est == "sampled")
    cfg.exact_mode = false;
  else
    throw std::invalid_argument("config: estimation must be exact|sampled");
  cfg.samples = run.value("samples", std::size_t{10000});
  cfg.iterations = run.value("iterations", 1);
  cfg.kernel_tol = run.value("kernel_tol", 0.0);
  cfg.ridge = run.value("ridge", 0.0);
  cfg.feasibility_tol = run.value("feasibility_tol", 1e-9);
  cfg.retry_cap = run.value("retry_cap", 64);
  cfg.seed = run.value("seed", std::uint64_t{0});
  cfg.out_path = run.value("out", std::string{});
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  return config_from_toml(toml::parse_file(path));
}

} // namespace qcp
