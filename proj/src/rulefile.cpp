#include "quadforge/rulefile.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

#include <json.hpp>

namespace quadforge {

using nlohmann::json;

namespace {

constexpr const char* kAxisKeys[] = {"x", "y", "z"};

double parse_decimal(std::string_view s, const std::string& what) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw RuleFormatError(what + ": not a finite decimal: '" + std::string(s) + "'");
  }
  return v;
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed(double v, int digits = 6) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  // "-0.000000" would make output depend on the sign of tiny values.
  if (std::string_view(buf).find_first_not_of("-0.") == std::string_view::npos) {
    std::snprintf(buf, sizeof buf, "%.*f", digits, 0.0);
  }
  return buf;
}

template <class T>
T require(const json& j, const char* key, json::value_t type) {
  auto it = j.find(key);
  if (it == j.end()) throw RuleFormatError(std::string("missing key '") + key + "'");
  const bool ok = it->type() == type ||
                  (type == json::value_t::number_float &&
                   (it->is_number_integer() || it->is_number_unsigned())) ||
                  (type == json::value_t::number_integer && it->is_number_unsigned());
  if (!ok) throw RuleFormatError(std::string("key '") + key + "' has the wrong type");
  return it->get<T>();
}

}  // namespace

std::string shortest_decimal(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("to_chars failed");
  return std::string(buf, ptr);
}

std::string serialize_rule(const RuleFile& f) {
  const QuadratureRule& r = f.rule;
  json points = json::array();
  for (std::size_t j = 0; j < r.size(); ++j) {
    json p = json::object();
    for (int k = 0; k < r.dim(); ++k) p[kAxisKeys[k]] = shortest_decimal(r.coord(j, k));
    p["w"] = shortest_decimal(r.weight(j));
    points.push_back(std::move(p));
  }
  json doc = {
      {"schema_version", std::string(kRuleSchemaVersion)},
      {"dimension", r.dim()},
      {"degree", f.degree},
      {"num_points", r.size()},
      {"loss", f.loss},
      {"loss_squared", f.loss_squared},
      {"basis", std::string(kBasisTag)},
      {"seed", f.seed},
      {"points", std::move(points)},
      {"provenance", {{"tool", f.provenance.tool}, {"timestamp", f.provenance.timestamp}}},
  };
  return doc.dump(2) + "\n";
}

RuleFile parse_rule(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw RuleFormatError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw RuleFormatError("rule file must be a JSON object");

  const auto version = require<std::string>(doc, "schema_version", json::value_t::string);
  if (version != kRuleSchemaVersion) throw RuleFormatError("unsupported schema_version '" + version + "'");
  const auto basis = require<std::string>(doc, "basis", json::value_t::string);
  if (basis != kBasisTag) throw RuleFormatError("unsupported basis '" + basis + "'");

  const int dim = require<int>(doc, "dimension", json::value_t::number_integer);
  if (dim != 2 && dim != 3) throw RuleFormatError("dimension must be 2 or 3");
  const int degree = require<int>(doc, "degree", json::value_t::number_integer);
  if (degree < 1) throw RuleFormatError("degree must be >= 1");
  const long declared = require<long>(doc, "num_points", json::value_t::number_integer);

  auto pts = doc.find("points");
  if (pts == doc.end() || !pts->is_array()) throw RuleFormatError("missing points array");
  if (declared != static_cast<long>(pts->size())) {
    throw RuleFormatError("num_points = " + std::to_string(declared) + " but points has " +
                          std::to_string(pts->size()) + " entries");
  }
  if (pts->empty()) throw RuleFormatError("rule has no points");

  std::vector<double> params;
  params.reserve(pts->size() * static_cast<std::size_t>(dim + 1));
  for (std::size_t j = 0; j < pts->size(); ++j) {
    const json& p = (*pts)[j];
    const std::string where = "point " + std::to_string(j);
    if (!p.is_object() || p.size() != static_cast<std::size_t>(dim + 1)) {
      throw RuleFormatError(where + " must have exactly the keys for dimension " + std::to_string(dim));
    }
    for (int k = 0; k <= dim; ++k) {
      const char* key = k < dim ? kAxisKeys[k] : "w";
      auto it = p.find(key);
      if (it == p.end() || !it->is_string()) throw RuleFormatError(where + " lacks string key '" + key + "'");
      params.push_back(parse_decimal(it->get<std::string>(), where));
    }
  }

  RuleFile f{degree,
             require<double>(doc, "loss", json::value_t::number_float),
             require<double>(doc, "loss_squared", json::value_t::number_float),
             0,
             {},
             QuadratureRule(dim, std::move(params))};
  auto seed = doc.find("seed");
  if (seed == doc.end() || !(seed->is_number_unsigned() || seed->is_number_integer())) {
    throw RuleFormatError("missing integer seed");
  }
  f.seed = seed->get<std::uint64_t>();
  auto prov = doc.find("provenance");
  if (prov == doc.end() || !prov->is_object()) throw RuleFormatError("missing provenance object");
  f.provenance.tool = require<std::string>(*prov, "tool", json::value_t::string);
  f.provenance.timestamp = require<std::string>(*prov, "timestamp", json::value_t::string);
  return f;
}

RuleFile read_rule_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_rule(ss.str());
}

void write_rule_file(const std::filesystem::path& path, const RuleFile& f) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << serialize_rule(f);
}

std::string export_csv(const QuadratureRule& rule) {
  std::string out = rule.dim() == 2 ? "x,y,w\n" : "x,y,z,w\n";
  for (std::size_t j = 0; j < rule.size(); ++j) {
    for (int k = 0; k < rule.dim(); ++k) out += g17(rule.coord(j, k)) + ",";
    out += g17(rule.weight(j)) + "\n";
  }
  return out;
}

std::string export_plain(const QuadratureRule& rule) {
  std::string out;
  for (std::size_t j = 0; j < rule.size(); ++j) {
    for (int k = 0; k < rule.dim(); ++k) out += g17(rule.coord(j, k)) + " ";
    out += g17(rule.weight(j)) + "\n";
  }
  return out;
}

QuadratureRule parse_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    if (nl > pos) lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  if (lines.empty()) throw RuleFormatError("empty CSV");
  int dim;
  if (lines[0] == "x,y,w") {
    dim = 2;
  } else if (lines[0] == "x,y,z,w") {
    dim = 3;
  } else {
    throw RuleFormatError("unrecognised CSV header '" + std::string(lines[0]) + "'");
  }
  std::vector<double> params;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    std::string_view row = lines[l];
    int fields = 0;
    while (true) {
      const std::size_t comma = row.find(',');
      params.push_back(parse_decimal(row.substr(0, comma), "CSV line " + std::to_string(l + 1)));
      ++fields;
      if (comma == std::string_view::npos) break;
      row.remove_prefix(comma + 1);
    }
    if (fields != dim + 1) throw RuleFormatError("CSV line " + std::to_string(l + 1) + " has wrong field count");
  }
  if (params.empty()) throw RuleFormatError("CSV has no rows");
  return QuadratureRule(dim, std::move(params));
}

std::string plot_svg(const QuadratureRule& rule, const PlotOptions& options) {
  if (rule.dim() == 3 && !options.projections) {
    throw std::invalid_argument("3D rules need the projection view");
  }
  constexpr double kMaxRadius = 0.06;
  constexpr double kPad = 0.1;
  constexpr double kPixelsPerUnit = 400.0;
  double w_max = 0.0;
  for (std::size_t j = 0; j < rule.size(); ++j) w_max = std::max(w_max, std::abs(rule.weight(j)));
  if (w_max == 0.0) w_max = 1.0;

  struct Panel {
    int a, b;
    const char* label;
  };
  std::vector<Panel> panels;
  if (rule.dim() == 2) {
    panels = {{0, 1, "x-y"}};
  } else {
    panels = {{0, 1, "x-y"}, {0, 2, "x-z"}, {1, 2, "y-z"}};
  }
  const double width = static_cast<double>(panels.size()) * (1.0 + kPad) + kPad;
  const double height = 1.0 + 2.0 * kPad;

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(width * kPixelsPerUnit, 0) +
         "\" height=\"" + fixed(height * kPixelsPerUnit, 0) + "\" viewBox=\"0 0 " + fixed(width) + " " +
         fixed(height) + "\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + fixed(width) + "\" height=\"" + fixed(height) + "\" fill=\"white\"/>\n";
  for (std::size_t k = 0; k < panels.size(); ++k) {
    const double ox = kPad + static_cast<double>(k) * (1.0 + kPad);
    // Flip y so the panel reads in the usual mathematical orientation.
    out += "<g transform=\"translate(" + fixed(ox) + "," + fixed(kPad + 1.0) + ") scale(1,-1)\">\n";
    out += "<rect class=\"frame\" x=\"0\" y=\"0\" width=\"1\" height=\"1\" fill=\"none\" stroke=\"black\" "
           "stroke-width=\"0.004\"/>\n";
    for (std::size_t j = 0; j < rule.size(); ++j) {
      const double r = kMaxRadius * std::sqrt(std::abs(rule.weight(j)) / w_max);
      out += "<circle cx=\"" + fixed(rule.coord(j, panels[k].a), 8) + "\" cy=\"" +
             fixed(rule.coord(j, panels[k].b), 8) + "\" r=\"" + fixed(r, 8) +
             "\" fill=\"steelblue\" fill-opacity=\"0.6\" stroke=\"navy\" stroke-width=\"0.002\"/>\n";
    }
    out += "</g>\n";
    out += "<text x=\"" + fixed(ox + 0.5) + "\" y=\"" + fixed(kPad * 0.7) +
           "\" font-size=\"0.05\" text-anchor=\"middle\">" + panels[k].label + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string provenance_timestamp(bool stamp_now) {
  std::time_t t;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  } else if (stamp_now) {
    t = std::time(nullptr);
  } else {
    return "";
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace quadforge
