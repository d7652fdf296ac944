#include "chainscope/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "chainscope/error.hpp"

namespace chainscope {

using nlohmann::json;

std::string format_real(double x) {
  if (!std::isfinite(x)) return "null";
  if (x == 0.0) x = 0.0;  // no negative zero
  char buf[64];
  std::snprintf(buf, sizeof buf, "%#.12g", x);
  return buf;
}

namespace {

void emit_string(std::ostringstream& out, const std::string& s) { out << json(s).dump(); }

void emit(std::ostringstream& out, const json& v, int indent) {
  const std::string pad(2 * (indent + 1), ' ');
  const std::string close(2 * indent, ' ');
  switch (v.type()) {
    case json::value_t::object: {
      if (v.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      bool first = true;
      // nlohmann's default object type is an ordered std::map, so keys come sorted.
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out << ",\n";
        first = false;
        out << pad;
        emit_string(out, it.key());
        out << ": ";
        emit(out, it.value(), indent + 1);
      }
      out << "\n" << close << "}";
      return;
    }
    case json::value_t::array: {
      if (v.empty()) {
        out << "[]";
        return;
      }
      bool scalars = true;
      for (const auto& e : v) scalars = scalars && !e.is_structured();
      if (scalars) {
        out << "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i) out << ", ";
          emit(out, v[i], indent + 1);
        }
        out << "]";
        return;
      }
      out << "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out << ",\n";
        out << pad;
        emit(out, v[i], indent + 1);
      }
      out << "\n" << close << "]";
      return;
    }
    case json::value_t::number_float:
      out << format_real(v.get<double>());
      return;
    default:
      out << v.dump();
  }
}

}  // namespace

std::string canonical_json(const json& doc) {
  std::ostringstream out;
  emit(out, doc, 0);
  out << "\n";
  return out.str();
}

void write_text(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ResourceError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ResourceError("failed writing '" + path + "'");
}

void write_report(const json& report, const std::string& path) { write_text(canonical_json(report), path); }

std::string witness_csv(std::span<const ChainStep> chain, int dim) {
  std::ostringstream out;
  out << "step,coord0" << (dim == 2 ? ",coord1" : "") << ",dist_to_image\n";
  for (std::size_t i = 0; i < chain.size(); ++i) {
    out << i << "," << format_real(chain[i].point[0]);
    if (dim == 2) out << "," << format_real(chain[i].point[1]);
    out << "," << format_real(chain[i].dist_to_image) << "\n";
  }
  return out.str();
}

json runs_json(const CellSet& set) {
  json out = json::array();
  for (const auto& r : set.runs()) out.push_back({r.first, r.last});
  return out;
}

}  // namespace chainscope
