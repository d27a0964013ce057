#include "colliderbias/signmap.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "colliderbias/closedform.hpp"
#include "colliderbias/error.hpp"
#include "colliderbias/params_io.hpp"

namespace colliderbias {

std::string_view to_string(Sign sign) {
  switch (sign) {
    case Sign::Negative: return "Negative";
    case Sign::Zero: return "Zero";
    case Sign::Positive: return "Positive";
  }
  return "?";
}

Sign parse_sign(std::string_view text) {
  if (text == "Negative" || text == "-1" || text == "-") return Sign::Negative;
  if (text == "Zero" || text == "0") return Sign::Zero;
  if (text == "Positive" || text == "1" || text == "+") return Sign::Positive;
  throw BiasError(ErrorCode::ParseError, "unknown sign '" + std::string(text) + "'");
}

std::string_view to_string(PatternKind kind) {
  switch (kind) {
    case PatternKind::BothPositive: return "BothPositive";
    case PatternKind::BothNegative: return "BothNegative";
    case PatternKind::OppositeSigns: return "OppositeSigns";
    case PatternKind::QualitativeInX: return "QualitativeInX";
    case PatternKind::QualitativeInY: return "QualitativeInY";
    case PatternKind::QualitativeInBoth: return "QualitativeInBoth";
    case PatternKind::DegenerateTie: return "DegenerateTie";
  }
  return "?";
}

std::string_view to_string(YSignCase c) {
  switch (c) {
    case YSignCase::NoChildEffect: return "NoChildEffect";
    case YSignCase::SameAsChildEffect: return "SameAsChildEffect";
    case YSignCase::ReverseChildEffect: return "ReverseChildEffect";
    case YSignCase::BothGNonPositive: return "BothGNonPositive";
    case YSignCase::BothGNonNegative: return "BothGNonNegative";
  }
  return "?";
}

namespace {

int sign_value(Sign s) {
  return s == Sign::Positive ? 1 : (s == Sign::Negative ? -1 : 0);
}

Sign from_value(int v) {
  return v > 0 ? Sign::Positive : (v < 0 ? Sign::Negative : Sign::Zero);
}

double cross(const ColliderTable& q, int c) {
  return q.prob(c, 0, 0) * q.prob(c, 1, 1) - q.prob(c, 1, 0) * q.prob(c, 0, 1);
}

void check_levels(int level) {
  if (level != 0 && level != 1) {
    throw BiasError(ErrorCode::UnsupportedQuery, "level must be 0 or 1");
  }
}

void violated(const std::string& what) {
  throw std::logic_error("sign rule violated: " + what);
}

std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw BiasError(ErrorCode::ParseError, "bad number '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

EffectPattern classify_effects(const ColliderTable& q) {
  EffectPattern out;
  out.canonical_level = q.p11 >= q.p00 ? 1 : 0;
  const int c = out.canonical_level;

  const double a = q.prob(c, 0, 0), b = q.prob(c, 1, 0);
  const double e = q.prob(c, 0, 1), d = q.prob(c, 1, 1);
  out.interaction.rr_c = sign_of(a * d - b * e);
  out.interaction.rr_other = sign_of(cross(q, 1 - c));
  out.interaction.odds_ratio =
      sign_of(a * d * (1 - b) * (1 - e) - b * e * (1 - a) * (1 - d));
  out.interaction.risk_difference = sign_of(d + a - b - e);

  const Sign x_at_y0 = sign_of(q.p10 - q.p00);
  const Sign x_at_y1 = sign_of(q.p11 - q.p01);
  const Sign y_at_x0 = sign_of(q.p01 - q.p00);
  const Sign y_at_x1 = sign_of(q.p11 - q.p10);
  if (x_at_y0 == Sign::Zero || x_at_y1 == Sign::Zero || y_at_x0 == Sign::Zero ||
      y_at_x1 == Sign::Zero) {
    out.pattern = PatternKind::DegenerateTie;
    return out;
  }
  const bool qual_x = x_at_y0 != x_at_y1;
  const bool qual_y = y_at_x0 != y_at_x1;
  if (qual_x && qual_y) {
    out.pattern = PatternKind::QualitativeInBoth;
  } else if (qual_x) {
    out.pattern = PatternKind::QualitativeInX;
  } else if (qual_y) {
    out.pattern = PatternKind::QualitativeInY;
  } else if (x_at_y0 != y_at_x0) {
    out.pattern = PatternKind::OppositeSigns;
  } else {
    out.pattern = x_at_y0 == Sign::Positive ? PatternKind::BothPositive
                                            : PatternKind::BothNegative;
  }
  return out;
}

Sign sign_v_stratum(const ColliderTable& q, int c) {
  check_levels(c);
  const Sign s1 = sign_of(cross(q, 1));
  const Sign s0 = sign_of(cross(q, 0));
  switch (classify_effects(q).pattern) {
    case PatternKind::BothPositive:
    case PatternKind::BothNegative:
      if (s1 == Sign::Positive && s0 == Sign::Positive) {
        violated("monotone same-direction effects with both strata positive");
      }
      break;
    case PatternKind::OppositeSigns:
      if (s1 == Sign::Negative && s0 == Sign::Negative) {
        violated("opposite-direction effects with both strata negative");
      }
      break;
    case PatternKind::QualitativeInX:
    case PatternKind::QualitativeInY:
    case PatternKind::QualitativeInBoth:
      if (s1 != Sign::Zero && s1 == s0) {
        violated("qualitative interaction with equal stratum signs");
      }
      break;
    case PatternKind::DegenerateTie:
      break;
  }
  return c == 1 ? s1 : s0;
}

YSign sign_y_stratum_rule(const ColliderTable& q, const BinaryConditional& dc,
                          int d) {
  check_levels(d);
  const double g1 = cross(q, 1);
  const double g0 = cross(q, 0);
  const Sign s1 = sign_of(g1);
  const Sign s0 = sign_of(g0);
  if (s1 == Sign::Zero && s0 == Sign::Zero) {
    throw BiasError(ErrorCode::DegenerateStratum, "g(1) and g(0) are both zero");
  }
  const double pd1 = dc.prob(d, 1);
  const double pd0 = dc.prob(d, 0);
  const Sign child = sign_of(pd1 - pd0);

  YSign out;
  if (child == Sign::Zero) {
    out = {Sign::Zero, YSignCase::NoChildEffect};
  } else if (sign_value(s1) >= 0 && sign_value(s0) <= 0) {
    out = {child, YSignCase::SameAsChildEffect};
  } else if (sign_value(s1) <= 0 && sign_value(s0) >= 0) {
    out = {-child, YSignCase::ReverseChildEffect};
  } else {
    // Same strict sign: compare p_{d|1}/p_{d|0} with t = g(0)/g(1) without
    // dividing by p_{d|0}.
    const double t = g0 / g1;
    const Sign vs_threshold = sign_of(pd1 - t * pd0);
    const bool between = vs_threshold != Sign::Zero && vs_threshold != child;
    Sign s = Sign::Zero;
    if (vs_threshold != Sign::Zero) s = between ? Sign::Positive : Sign::Negative;
    if (s1 == Sign::Negative) {
      out = {s, YSignCase::BothGNonPositive};
    } else {
      out = {-s, YSignCase::BothGNonNegative};
    }
  }

  const double core = (pd1 - pd0) * (pd1 * g1 - pd0 * g0);
  if (out.sign != sign_of(core) && std::abs(core) > 1e-9) {
    violated("Y-bias case rule disagrees with the direct sign");
  }
  return out;
}

Sign sign_y_stratum(const ColliderTable& q, const BinaryConditional& dc, int d) {
  return sign_y_stratum_rule(q, dc, d).sign;
}

Sign sign_lm_v(const ValidatedParams& params) {
  if (params.kind() != StructureKind::V) {
    throw BiasError(ErrorCode::UnsupportedQuery, "sign_lm_v needs a V structure");
  }
  const Sign s = sign_of(h(params));
  switch (classify_effects(params.collider()).pattern) {
    case PatternKind::BothPositive:
    case PatternKind::BothNegative:
      if (s == Sign::Positive) violated("monotone same-direction effects with positive lm bias");
      break;
    case PatternKind::OppositeSigns:
      if (s == Sign::Negative) violated("opposite-direction effects with negative lm bias");
      break;
    default:
      break;
  }
  return s;
}

Sign sign_extended(const ValidatedParams& params, const Conditioning& conditioning) {
  const StructureKind kind = params.kind();
  if (kind == StructureKind::Nabla) {
    throw BiasError(ErrorCode::UnsupportedQuery,
                    "Nabla has no embedded V core to factor the sign through");
  }
  const Sign paths = sign_of(params.rd_left()) * sign_of(params.rd_right());
  if (std::holds_alternative<LinearModel>(conditioning)) {
    const Sign child = sign_of(params.rd_child());
    return sign_of(h(params)) * paths * (child * child);
  }
  const Stratum s = std::get<Stratum>(conditioning);
  if (s.variable != conditioning_variable(kind)) {
    throw BiasError(ErrorCode::UnsupportedQuery,
                    std::string(to_string(kind)) + " is stratified on " +
                        std::string(to_string(conditioning_variable(kind))));
  }
  const Sign embedded = has_child_d(kind)
                            ? sign_y_stratum(params.collider(), params.d_given_c(), s.level)
                            : sign_v_stratum(params.collider(), s.level);
  return embedded * paths;
}

std::string_view to_string(GridFamily family) {
  switch (family) {
    case GridFamily::Fig3: return "Fig3";
    case GridFamily::Fig4: return "Fig4";
    case GridFamily::Fig5: return "Fig5";
  }
  return "?";
}

GridFamily parse_family(std::string_view name) {
  for (GridFamily f : {GridFamily::Fig3, GridFamily::Fig4, GridFamily::Fig5}) {
    if (to_string(f) == name) return f;
  }
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "fig3") return GridFamily::Fig3;
  if (lower == "fig4") return GridFamily::Fig4;
  if (lower == "fig5") return GridFamily::Fig5;
  throw BiasError(ErrorCode::ParseError, "unknown grid family '" + std::string(name) + "'");
}

namespace {

std::vector<std::string> family_columns(GridFamily family) {
  switch (family) {
    case GridFamily::Fig3: return {"sign_c1", "sign_c0"};
    case GridFamily::Fig4: return {"sign_d1", "sign_d0"};
    case GridFamily::Fig5: return {"sign_lm"};
  }
  return {};
}

void require_family_kind(GridFamily family, StructureKind kind) {
  const bool ok = (family == GridFamily::Fig3 &&
                   (kind == StructureKind::V || kind == StructureKind::Nabla)) ||
                  (family == GridFamily::Fig4 && kind == StructureKind::Y) ||
                  (family == GridFamily::Fig5 && kind == StructureKind::V);
  if (!ok) {
    throw BiasError(ErrorCode::UnsupportedQuery,
                    std::string(to_string(family)) + " grid cannot use a " +
                        std::string(to_string(kind)) + " structure");
  }
}

std::vector<ZeroLocus> family_loci(GridFamily family, const ValidatedParams& p) {
  const ColliderTable& q = p.collider();
  const std::string a = fmt(q.p00), d = fmt(q.p11);
  const std::string a0 = fmt(1 - q.p00), d0 = fmt(1 - q.p11);
  std::vector<ZeroLocus> loci = {
      {"rr_c1", "p10*p01 = " + a + "*" + d},
      {"rr_c0", "(1-p10)*(1-p01) = " + a0 + "*" + d0},
      {"rd", "p10+p01 = " + a + "+" + d},
      {"or", "p10*p01*" + a0 + "*" + d0 + " = " + a + "*" + d + "*(1-p10)*(1-p01)"},
  };
  if (family == GridFamily::Fig4) {
    const BinaryConditional& dc = p.d_given_c();
    for (int level : {1, 0}) {
      const std::string pd1 = fmt(dc.prob(level, 1));
      const std::string pd0 = fmt(dc.prob(level, 0));
      loci.push_back({"y_d" + std::to_string(level),
                      pd1 + "*(" + a + "*" + d + "-p10*p01) = " + pd0 + "*(" + a0 +
                          "*" + d0 + "-(1-p10)*(1-p01))"});
    }
  }
  if (family == GridFamily::Fig5) {
    const double px = p.left_cause(), py = p.right_cause();
    loci.push_back({"x_indep_c", "p01 = " + d + " + " + fmt((1 - py) / py) +
                                     "*(p10 - " + a + ")"});
    loci.push_back({"y_indep_c", "p01 = " + a + " + " + fmt(px / (1 - px)) +
                                     "*(p10 - " + d + ")"});
  }
  return loci;
}

std::vector<Sign> cell_signs(GridFamily family, const ValidatedParams& p) {
  switch (family) {
    case GridFamily::Fig3:
      return {sign_v_stratum(p.collider(), 1), sign_v_stratum(p.collider(), 0)};
    case GridFamily::Fig4: {
      std::vector<Sign> out;
      for (int level : {1, 0}) {
        try {
          out.push_back(sign_y_stratum(p.collider(), p.d_given_c(), level));
        } catch (const BiasError& e) {
          if (e.code() != ErrorCode::DegenerateStratum) throw;
          out.push_back(Sign::Zero);
        }
      }
      return out;
    }
    case GridFamily::Fig5:
      return {sign_lm_v(p)};
  }
  return {};
}

}  // namespace

SignGrid emit_grid(GridFamily family, const StructureParams& fixed,
                   std::size_t resolution) {
  if (resolution < 2) {
    throw BiasError(ErrorCode::InvalidResolution,
                    "resolution must be at least 2, got " + std::to_string(resolution));
  }
  require_family_kind(family, fixed.kind);
  const ValidatedParams base = validate(fixed, Strictness::Strict);

  SignGrid grid;
  grid.family = family;
  grid.fixed = fixed;
  grid.resolution = resolution;
  grid.columns = family_columns(family);
  grid.loci = family_loci(family, base);
  grid.cells.reserve(resolution * resolution);

  StructureParams cell = fixed;
  const double n = static_cast<double>(resolution);
  for (std::size_t i = 0; i < resolution; ++i) {
    for (std::size_t j = 0; j < resolution; ++j) {
      cell.p_c_given.p10 = (static_cast<double>(i) + 0.5) / n;
      cell.p_c_given.p01 = (static_cast<double>(j) + 0.5) / n;
      const ValidatedParams p = validate(cell, Strictness::Strict);
      grid.cells.push_back({cell.p_c_given.p10, cell.p_c_given.p01, cell_signs(family, p)});
    }
  }
  return grid;
}

void write_grid_csv(std::ostream& out, const SignGrid& grid) {
  out << "# family=" << to_string(grid.family) << '\n';
  out << "# resolution=" << grid.resolution << '\n';
  out << "# params=" << serialize_params(grid.fixed) << '\n';
  for (const ZeroLocus& z : grid.loci) {
    out << "# locus " << z.name << ": " << z.expression << '\n';
  }
  out << "p10,p01";
  for (const std::string& c : grid.columns) out << ',' << c;
  out << '\n';
  for (const GridCell& cell : grid.cells) {
    out << fmt(cell.p10) << ',' << fmt(cell.p01);
    for (Sign s : cell.signs) out << ',' << sign_value(s);
    out << '\n';
  }
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view after_prefix(std::string_view line, std::string_view prefix) {
  return line.substr(prefix.size());
}

}  // namespace

SignGrid read_grid_csv(std::istream& in) {
  SignGrid grid;
  bool have_family = false, have_params = false, have_header = false;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view v(line);
    if (v.empty()) continue;
    if (v.rfind("# family=", 0) == 0) {
      grid.family = parse_family(after_prefix(v, "# family="));
      have_family = true;
    } else if (v.rfind("# resolution=", 0) == 0) {
      grid.resolution = static_cast<std::size_t>(
          parse_double(after_prefix(v, "# resolution=")));
    } else if (v.rfind("# params=", 0) == 0) {
      grid.fixed = parse_params(std::string(after_prefix(v, "# params=")));
      have_params = true;
    } else if (v.rfind("# locus ", 0) == 0) {
      const std::string_view rest = after_prefix(v, "# locus ");
      const std::size_t colon = rest.find(": ");
      if (colon == std::string_view::npos) {
        throw BiasError(ErrorCode::ParseError, "malformed locus line");
      }
      grid.loci.push_back({std::string(rest.substr(0, colon)),
                           std::string(rest.substr(colon + 2))});
    } else if (v.front() == '#') {
      continue;
    } else if (!have_header) {
      const auto cols = split(v, ',');
      if (cols.size() < 3 || cols[0] != "p10" || cols[1] != "p01") {
        throw BiasError(ErrorCode::ParseError, "grid header must start with p10,p01");
      }
      for (std::size_t k = 2; k < cols.size(); ++k) grid.columns.emplace_back(cols[k]);
      have_header = true;
    } else {
      const auto fields = split(v, ',');
      if (fields.size() != grid.columns.size() + 2) {
        throw BiasError(ErrorCode::ParseError, "grid row has wrong field count");
      }
      GridCell cell{parse_double(fields[0]), parse_double(fields[1]), {}};
      for (std::size_t k = 2; k < fields.size(); ++k) {
        cell.signs.push_back(parse_sign(fields[k]));
      }
      grid.cells.push_back(std::move(cell));
    }
  }
  if (!have_family || !have_params || !have_header) {
    throw BiasError(ErrorCode::ParseError, "grid file is missing metadata");
  }
  if (grid.cells.size() != grid.resolution * grid.resolution) {
    throw BiasError(ErrorCode::ParseError, "grid has " + std::to_string(grid.cells.size()) +
                                               " cells for resolution " +
                                               std::to_string(grid.resolution));
  }
  return grid;
}

nlohmann::json grid_to_json(const SignGrid& grid) {
  nlohmann::json doc;
  doc["family"] = std::string(to_string(grid.family));
  doc["resolution"] = grid.resolution;
  doc["params"] = params_to_json(grid.fixed);
  doc["columns"] = grid.columns;
  nlohmann::json loci = nlohmann::json::array();
  for (const ZeroLocus& z : grid.loci) {
    loci.push_back({{"name", z.name}, {"expression", z.expression}});
  }
  doc["loci"] = std::move(loci);
  nlohmann::json cells = nlohmann::json::array();
  for (const GridCell& cell : grid.cells) {
    nlohmann::json row = {cell.p10, cell.p01};
    for (Sign s : cell.signs) row.push_back(sign_value(s));
    cells.push_back(std::move(row));
  }
  doc["cells"] = std::move(cells);
  return doc;
}

SignGrid grid_from_json(const nlohmann::json& doc) {
  SignGrid grid;
  try {
    grid.family = parse_family(doc.at("family").get<std::string>());
    grid.resolution = doc.at("resolution").get<std::size_t>();
    grid.fixed = params_from_json(doc.at("params"));
    grid.columns = doc.at("columns").get<std::vector<std::string>>();
    for (const auto& z : doc.at("loci")) {
      grid.loci.push_back({z.at("name").get<std::string>(),
                           z.at("expression").get<std::string>()});
    }
    for (const auto& row : doc.at("cells")) {
      if (row.size() != grid.columns.size() + 2) {
        throw BiasError(ErrorCode::ParseError, "grid row has wrong field count");
      }
      GridCell cell{row[0].get<double>(), row[1].get<double>(), {}};
      for (std::size_t k = 2; k < row.size(); ++k) {
        cell.signs.push_back(from_value(row[k].get<int>()));
      }
      grid.cells.push_back(std::move(cell));
    }
  } catch (const nlohmann::json::exception& e) {
    throw BiasError(ErrorCode::ParseError, e.what());
  }
  return grid;
}

}  // namespace colliderbias
