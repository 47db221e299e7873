#include "ompcs/text_format.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace ompcs::text {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) fail(Errc::invalid_argument, "format_double: conversion failed");
  return std::string(buf.data(), end);
}

std::string format_complex(cplx value) {
  std::string out = format_double(value.real());
  const std::string im = format_double(value.imag());
  if (im.front() != '-') out.push_back('+');
  out += im;
  out.push_back('j');
  return out;
}

double parse_double(std::string_view token) {
  token = trim(token);
  if (token == "inf" || token == "+inf") return INFINITY;
  if (token == "-inf") return -INFINITY;
  if (token == "nan") return NAN;
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size() || token.empty())
    fail(Errc::parse, "not a number: '" + std::string(token) + "'");
  return value;
}

std::uint64_t parse_u64(std::string_view token) {
  token = trim(token);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size() || token.empty())
    fail(Errc::parse, "not a non-negative integer: '" + std::string(token) + "'");
  return value;
}

cplx parse_complex(std::string_view token) {
  token = trim(token);
  if (token.size() < 2 || token.back() != 'j')
    fail(Errc::parse, "complex entry must end in 'j': '" + std::string(token) + "'");
  token.remove_suffix(1);
  // The separator is the last sign that is not the sign of an exponent.
  std::size_t split_at = std::string_view::npos;
  for (std::size_t i = token.size(); i-- > 1;) {
    if ((token[i] == '+' || token[i] == '-') && token[i - 1] != 'e' && token[i - 1] != 'E') {
      split_at = i;
      break;
    }
  }
  if (split_at == std::string_view::npos)
    fail(Errc::parse, "complex entry lacks an imaginary part: '" + std::string(token) + "j'");
  return {parse_double(token.substr(0, split_at)), parse_double(token.substr(split_at))};
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::map<std::string, std::string> parse_key_values(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  while (next_data_line(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(Errc::parse, "expected key=value, got '" + line + "'");
    const auto key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) fail(Errc::parse, "empty key in '" + line + "'");
    out[std::string(key)] = std::string(trim(std::string_view(line).substr(eq + 1)));
  }
  return out;
}

bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    return true;
  }
  return false;
}

}  // namespace ompcs::text
