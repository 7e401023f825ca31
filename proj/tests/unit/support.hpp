#pragma once

#include "apa/cfg.hpp"
#include "apa/lang.hpp"

#include <fstream>
#include <sstream>
#include <string>

namespace apa::test {

inline std::string fixture_text(const std::string& name) {
  std::ifstream in(std::string(APA_FIXTURES) + "/" + name, std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Cfg fixture_cfg(const std::string& name) {
  std::string text = fixture_text(name);
  if (name.size() > 4 && name.substr(name.size() - 4) == ".cfg") return parse_cfg_text(text);
  return lang::lower_to_cfg(lang::parse_program(text));
}

inline EdgeId edge(const Cfg& g, const std::string& name) {
  auto e = g.find_edge(name);
  if (!e) throw std::runtime_error("no edge " + name);
  return *e;
}

} // namespace apa::test
