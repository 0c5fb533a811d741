#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "quadforge/quadrature.hpp"

namespace quadforge {

inline constexpr std::string_view kRuleSchemaVersion = "quadforge-rule/1";
inline constexpr std::string_view kBasisTag = "orthonormal-shifted-legendre/v1";
inline constexpr std::string_view kToolVersion = "quadforge 0.1.0";

/// Raised for malformed or schema-violating rule files.
class RuleFormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Provenance {
  std::string tool{kToolVersion};
  std::string timestamp;
};

/// On-disk form of a quadrature rule.
struct RuleFile {
  int degree = 0;
  double loss = 0.0;
  double loss_squared = 0.0;
  std::uint64_t seed = 0;
  Provenance provenance;
  QuadratureRule rule;

  int dimension() const { return rule.dim(); }
  std::size_t num_points() const { return rule.size(); }
};

/// Shortest decimal string that parses back to exactly v.
std::string shortest_decimal(double v);

/// Canonical JSON: sorted keys, two-space indent, LF newlines, trailing newline.
std::string serialize_rule(const RuleFile& f);
RuleFile parse_rule(std::string_view json_text);

RuleFile read_rule_file(const std::filesystem::path& path);
void write_rule_file(const std::filesystem::path& path, const RuleFile& f);

/// "x,y[,z],w" header then one row per point, 17 significant digits.
std::string export_csv(const QuadratureRule& rule);
/// Whitespace-separated columns, no header.
std::string export_plain(const QuadratureRule& rule);
/// Inverse of export_csv; the header fixes the dimension.
QuadratureRule parse_csv(std::string_view text);

struct PlotOptions {
  /// Render 3D rules as xy, xz and yz projections side by side.
  bool projections = false;
};

/// Unit-square frame with one circle per point, area proportional to weight;
/// the heaviest point gets radius 0.06.
std::string plot_svg(const QuadratureRule& rule, const PlotOptions& options = {});

/// Timestamp for provenance: SOURCE_DATE_EPOCH when set, else empty.
std::string provenance_timestamp(bool stamp_now);

}  // namespace quadforge
