#include "colliderbias/commands.hpp"

#include <charconv>
#include <cstdio>
#include <ostream>
#include <set>

#include "colliderbias/closedform.hpp"
#include "colliderbias/error.hpp"
#include "colliderbias/joint.hpp"
#include "colliderbias/params_io.hpp"

namespace colliderbias {

std::string_view to_string(Command command) {
  switch (command) {
    case Command::Compute: return "compute";
    case Command::Sign: return "sign";
    case Command::Verify: return "verify";
    case Command::Sample: return "sample";
    case Command::Grid: return "grid";
  }
  return "?";
}

OutputFormat parse_format(std::string_view name) {
  if (name == "text") return OutputFormat::Text;
  if (name == "json") return OutputFormat::Json;
  if (name == "csv") return OutputFormat::Csv;
  throw BiasError(ErrorCode::ParseError, "unknown format '" + std::string(name) + "'");
}

namespace {

std::string num(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

void require_format(const RunConfig& config, std::initializer_list<OutputFormat> allowed) {
  for (OutputFormat f : allowed) {
    if (config.format == f) return;
  }
  throw BiasError(ErrorCode::UnsupportedQuery,
                  std::string(to_string(config.command)) +
                      " does not support the requested output format");
}

}  // namespace

StructureParams resolve_params(const RunConfig& config) {
  StructureParams params;
  std::set<std::string> given;
  if (config.file) {
    params = load_params_file(*config.file);
  } else if (!config.kind) {
    throw BiasError(ErrorCode::MissingField, "kind (pass --kind or --file)");
  }
  if (config.kind) params.kind = parse_kind(*config.kind);
  for (const std::string& item : config.overrides) {
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos) {
      throw BiasError(ErrorCode::ParseError, "override '" + item + "' is not key=value");
    }
    const std::string key = item.substr(0, eq);
    set_param_field(params, key, std::string_view(item).substr(eq + 1));
    given.insert(key);
  }
  if (!config.file) {
    for (const char* key : {"p_left", "p_c_given.00", "p_c_given.01", "p_c_given.10",
                            "p_c_given.11"}) {
      if (!given.count(key)) throw BiasError(ErrorCode::MissingField, key);
    }
  }
  return params;
}

BiasQuery resolve_query(const RunConfig& config, StructureKind kind) {
  BiasQuery query;
  if (config.lm) {
    if (config.stratum) {
      throw BiasError(ErrorCode::UnsupportedQuery, "--lm and --stratum are exclusive");
    }
    query.conditioning = LinearModel{};
    query.scale = Scale::LMCoef;
    return query;
  }
  query.scale = config.scale ? parse_scale(*config.scale) : Scale::Cov;
  if (query.scale == Scale::LMCoef) {
    query.conditioning = LinearModel{};
    return query;
  }
  Stratum s{conditioning_variable(kind), 1};
  if (config.stratum) {
    const std::string& text = *config.stratum;
    const std::size_t eq = text.find('=');
    if (eq == std::string::npos || eq + 2 != text.size()) {
      throw BiasError(ErrorCode::ParseError, "stratum '" + text + "' is not VAR=0|1");
    }
    s.variable = parse_variable(std::string_view(text).substr(0, eq));
    const char level = text[eq + 1];
    if (level != '0' && level != '1') {
      throw BiasError(ErrorCode::ParseError, "stratum level must be 0 or 1");
    }
    s.level = level - '0';
  }
  query.conditioning = s;
  return query;
}

nlohmann::json evaluation_to_json(const StructureParams& params, const Evaluation& ev) {
  nlohmann::json doc;
  doc["kind"] = std::string(to_string(params.kind));
  doc["params"] = params_to_json(params);
  doc["scale"] = std::string(to_string(ev.oracle.scale));
  doc["conditioning"] = describe(ev.oracle.conditioning);
  doc["route"] = ev.route;
  doc["oracle"] = ev.oracle.value;
  if (ev.closed_form) {
    doc["value"] = ev.closed_form->value;
    doc["sign"] = std::string(to_string(ev.closed_form->sign));
    nlohmann::json factors = nlohmann::json::array();
    for (const auto& [name, value] : ev.closed_form->factors) {
      factors.push_back({{"name", name}, {"value", value}});
    }
    doc["factors"] = std::move(factors);
    doc["abs_discrepancy"] = ev.abs_discrepancy;
    doc["rel_discrepancy"] = ev.rel_discrepancy;
  } else {
    doc["value"] = ev.oracle.value;
    const bool ratio = ev.oracle.scale == Scale::OR || ev.oracle.scale == Scale::RR;
    doc["sign"] = std::string(
        to_string(ratio ? sign_of_factor(ev.oracle.value) : sign_of(ev.oracle.value)));
  }
  return doc;
}

int run_compute(const RunConfig& config, std::ostream& out) {
  require_format(config, {OutputFormat::Text, OutputFormat::Json});
  const StructureParams params = resolve_params(config);
  const BiasQuery query = resolve_query(config, params.kind);
  const Evaluation ev = evaluate(params, query);
  const bool ok = ev.within(config.tolerance.value_or(kAbsTolerance),
                            config.rel_tolerance.value_or(kRelTolerance));
  if (config.format == OutputFormat::Json) {
    nlohmann::json doc = evaluation_to_json(params, ev);
    doc["within_tolerance"] = ok;
    out << doc.dump(2) << '\n';
  } else {
    const nlohmann::json doc = evaluation_to_json(params, ev);
    out << "kind: " << to_string(params.kind) << '\n'
        << "scale: " << to_string(ev.oracle.scale) << '\n'
        << "conditioning: " << describe(ev.oracle.conditioning) << '\n'
        << "route: " << ev.route << '\n'
        << "value: " << num(doc["value"].get<double>()) << '\n'
        << "oracle: " << num(ev.oracle.value) << '\n'
        << "sign: " << doc["sign"].get<std::string>() << '\n';
    if (ev.closed_form) {
      out << "abs_discrepancy: " << sci(ev.abs_discrepancy) << '\n'
          << "rel_discrepancy: " << sci(ev.rel_discrepancy) << '\n';
      for (const auto& [name, value] : ev.closed_form->factors) {
        out << "  " << name << " = " << num(value) << '\n';
      }
    }
    out << "status: " << (ok ? "ok" : "MISMATCH") << '\n';
  }
  return ok ? kExitOk : kExitTolerance;
}

int run_sign(const RunConfig& config, std::ostream& out) {
  require_format(config, {OutputFormat::Text, OutputFormat::Json});
  const StructureParams raw = resolve_params(config);
  const ValidatedParams params = validate(raw, Strictness::Lenient);
  const StructureKind kind = params.kind();
  const Variable gv = conditioning_variable(kind);
  const EffectPattern pattern = classify_effects(params.collider());

  nlohmann::json doc;
  doc["kind"] = std::string(to_string(kind));
  doc["pattern"] = std::string(to_string(pattern.pattern));
  doc["canonical_level"] = pattern.canonical_level;
  doc["interaction"] = {
      {"rr_c", std::string(to_string(pattern.interaction.rr_c))},
      {"rr_other", std::string(to_string(pattern.interaction.rr_other))},
      {"or", std::string(to_string(pattern.interaction.odds_ratio))},
      {"rd", std::string(to_string(pattern.interaction.risk_difference))},
  };
  nlohmann::json strata = nlohmann::json::array();
  for (int level : {1, 0}) {
    const Stratum s{gv, level};
    nlohmann::json entry = {{"conditioning", describe(s)}};
    if (kind == StructureKind::Nabla) {
      entry["sign"] = std::string(to_string(sign_v_stratum(params.collider(), level)));
    } else {
      entry["sign"] = std::string(to_string(sign_extended(params, s)));
    }
    if (has_child_d(kind)) {
      entry["rule"] = std::string(
          to_string(sign_y_stratum_rule(params.collider(), params.d_given_c(), level).rule));
    }
    strata.push_back(std::move(entry));
  }
  doc["strata"] = std::move(strata);
  if (kind != StructureKind::Nabla) {
    doc["lm"] = std::string(to_string(sign_extended(params, LinearModel{})));
  }

  if (config.format == OutputFormat::Json) {
    out << doc.dump(2) << '\n';
    return kExitOk;
  }
  out << "kind: " << doc["kind"].get<std::string>() << '\n'
      << "pattern: " << doc["pattern"].get<std::string>() << '\n'
      << "canonical level: C=" << pattern.canonical_level << '\n';
  for (const auto& [scale, sign] : doc["interaction"].items()) {
    out << "interaction " << scale << ": " << sign.get<std::string>() << '\n';
  }
  for (const auto& entry : doc["strata"]) {
    out << "bias " << entry["conditioning"].get<std::string>() << ": "
        << entry["sign"].get<std::string>();
    if (entry.contains("rule")) out << " (" << entry["rule"].get<std::string>() << ")";
    out << '\n';
  }
  if (doc.contains("lm")) out << "bias lm: " << doc["lm"].get<std::string>() << '\n';
  return kExitOk;
}

nlohmann::json verify_to_json(const VerifySummary& summary) {
  nlohmann::json doc;
  doc["seed"] = summary.seed;
  doc["passed"] = summary.passed();
  nlohmann::json kinds = nlohmann::json::array();
  for (const KindSummary& k : summary.kinds) {
    nlohmann::json ids = nlohmann::json::array();
    for (const IdentityResult& r : k.identities) {
      ids.push_back({{"name", r.name},
                     {"checks", r.checks},
                     {"failures", r.failures},
                     {"max_discrepancy", r.max_discrepancy},
                     {"tolerance", r.tolerance},
                     {"relative", r.relative}});
    }
    kinds.push_back({{"kind", std::string(to_string(k.kind))},
                     {"draws", k.draws},
                     {"passed", k.passed()},
                     {"identities", std::move(ids)}});
  }
  doc["kinds"] = std::move(kinds);
  return doc;
}

int run_verify(const RunConfig& config, std::ostream& out) {
  require_format(config, {OutputFormat::Text, OutputFormat::Json});
  std::vector<StructureKind> kinds;
  if (config.all_kinds) {
    kinds.assign(kAllKinds.begin(), kAllKinds.end());
  } else if (config.kind) {
    kinds.push_back(parse_kind(*config.kind));
  } else {
    throw BiasError(ErrorCode::MissingField, "verify needs --kind or --all");
  }
  VerifyOptions options;
  options.seed = config.seed;
  options.draws = config.draws.value_or(1000);
  if (config.tolerance) options.abs_tolerance = *config.tolerance;
  if (config.rel_tolerance) options.rel_tolerance = *config.rel_tolerance;
  const VerifySummary summary = verify(kinds, options);

  if (config.format == OutputFormat::Json) {
    out << verify_to_json(summary).dump(2) << '\n';
  } else {
    out << "seed " << summary.seed << '\n';
    for (const KindSummary& k : summary.kinds) {
      out << to_string(k.kind) << " (" << k.draws << " draws)\n";
      for (const IdentityResult& r : k.identities) {
        out << "  " << (r.passed() ? "ok  " : "FAIL") << "  " << r.name
            << "  max " << (r.relative ? "rel " : "abs ") << sci(r.max_discrepancy);
        if (r.failures) out << "  failures " << r.failures << '/' << r.checks;
        out << '\n';
      }
    }
    out << (summary.passed() ? "all identities hold" : "identity failures") << '\n';
  }
  return summary.passed() ? kExitOk : kExitTolerance;
}

int run_sample(const RunConfig& config, std::ostream& out) {
  const StructureParams raw = resolve_params(config);
  const ValidatedParams params = validate(raw, Strictness::Lenient);
  const SampleTable table = sample(params, config.draws.value_or(1000000), config.seed);
  const JointTable joint = build_joint(params);
  const std::vector<double> freq = table.frequencies();

  auto cell_name = [&](std::size_t cell) {
    std::string s;
    for (std::size_t i = 0; i < table.order.size(); ++i) {
      if (i) s += ' ';
      s += std::string(to_string(table.order[i])) + "=" + std::to_string((cell >> i) & 1U);
    }
    return s;
  };
  double max_dev = 0.0;
  for (std::size_t c = 0; c < freq.size(); ++c) {
    max_dev = std::max(max_dev, std::abs(freq[c] - joint.mass()[c]));
  }

  if (config.format == OutputFormat::Json) {
    nlohmann::json cells = nlohmann::json::array();
    for (std::size_t c = 0; c < freq.size(); ++c) {
      cells.push_back({{"cell", cell_name(c)},
                       {"count", table.counts[c]},
                       {"frequency", freq[c]},
                       {"exact", joint.mass()[c]}});
    }
    nlohmann::json doc = {{"kind", std::string(to_string(table.kind))},
                          {"draws", table.draws},
                          {"seed", config.seed},
                          {"max_abs_deviation", max_dev},
                          {"cells", std::move(cells)}};
    out << doc.dump(2) << '\n';
  } else if (config.format == OutputFormat::Csv) {
    out << "# kind=" << to_string(table.kind) << '\n'
        << "# draws=" << table.draws << '\n'
        << "# seed=" << config.seed << '\n'
        << "cell,count,frequency,exact\n";
    for (std::size_t c = 0; c < freq.size(); ++c) {
      out << cell_name(c) << ',' << table.counts[c] << ',' << num(freq[c]) << ','
          << num(joint.mass()[c]) << '\n';
    }
  } else {
    out << "kind " << to_string(table.kind) << ", " << table.draws << " draws, seed "
        << config.seed << '\n';
    for (std::size_t c = 0; c < freq.size(); ++c) {
      out << "  " << cell_name(c) << "  count " << table.counts[c] << "  freq "
          << num(freq[c]) << "  exact " << num(joint.mass()[c]) << '\n';
    }
    out << "max |freq - exact| = " << sci(max_dev) << '\n';
  }
  return kExitOk;
}

int run_grid(const RunConfig& config, std::ostream& out) {
  require_format(config, {OutputFormat::Csv, OutputFormat::Json, OutputFormat::Text});
  const StructureParams params = resolve_params(config);
  const SignGrid grid = emit_grid(parse_family(config.family), params, config.resolution);
  if (config.format == OutputFormat::Json) {
    out << grid_to_json(grid).dump() << '\n';
  } else {
    write_grid_csv(out, grid);
  }
  return kExitOk;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    switch (config.command) {
      case Command::Compute: return run_compute(config, out);
      case Command::Sign: return run_sign(config, out);
      case Command::Verify: return run_verify(config, out);
      case Command::Sample: return run_sample(config, out);
      case Command::Grid: return run_grid(config, out);
    }
  } catch (const BiasError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace colliderbias
