#pragma once

// JSON, text and CSV forms of groups, gradings, polynomials and reports.

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "utstar/codimension.hpp"

namespace utstar {

using Json = nlohmann::ordered_json;

namespace detail {

template <typename T>
T json_get(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ParseError(std::string("field \"") + key + "\": " + e.what());
  }
}

inline RankMode rank_mode_from(const std::string& s) {
  if (s == "exact") return RankMode::Exact;
  if (s == "modular-agreed") return RankMode::ModularAgreed;
  throw ParseError("unknown rank mode \"" + s + "\"");
}

}  // namespace detail

inline Json group_to_json(const GroupSpec& g) {
  Json j;
  j["kind"] = to_string(g.kind());
  switch (g.kind()) {
    case GroupKind::Free: j["rank"] = g.rank(); break;
    case GroupKind::Cyclic: j["order"] = g.order(); break;
    case GroupKind::Table:
      j["size"] = g.order();
      j["mul"] = g.table();
      j["identity"] = g.identity_index();
      break;
  }
  return j;
}

inline GroupSpec group_from_json(const Json& j) {
  auto kind = detail::json_get<std::string>(j, "kind");
  try {
    if (kind == "free") return GroupSpec::free(detail::json_get<int>(j, "rank"));
    if (kind == "cyclic") return GroupSpec::cyclic(detail::json_get<std::uint32_t>(j, "order"));
    if (kind == "table") {
      auto mul = detail::json_get<std::vector<std::vector<std::uint32_t>>>(j, "mul");
      if (j.contains("size") && detail::json_get<std::size_t>(j, "size") != mul.size())
        throw ParseError("table size does not match the multiplication table");
      return GroupSpec::table(std::move(mul), detail::json_get<std::uint32_t>(j, "identity"));
    }
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid group: ") + e.what());
  }
  throw ParseError("unknown group kind \"" + kind + "\"");
}

inline Json grading_to_json(const ElementaryGrading& g) {
  Json j;
  j["group"] = group_to_json(g.group());
  j["n"] = g.n();
  Json sd = Json::array();
  for (const auto& e : g.superdiagonal()) sd.push_back(g.group().format(e));
  j["superdiagonal"] = sd;
  return j;
}

inline ElementaryGrading grading_from_json(const Json& j) {
  auto group = group_from_json(j.contains("group") ? j.at("group") : Json());
  auto n = detail::json_get<int>(j, "n");
  auto literals = detail::json_get<std::vector<Json>>(j, "superdiagonal");
  std::vector<GroupElement> sd;
  for (const auto& lit : literals) {
    if (lit.is_string()) sd.push_back(group.parse(lit.get<std::string>()));
    else if (lit.is_number_integer()) sd.push_back(group.parse(std::to_string(lit.get<long long>())));
    else throw ParseError("superdiagonal entries must be element literals");
  }
  try {
    return ElementaryGrading(std::move(group), n, std::move(sd));
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid grading: ") + e.what());
  }
}

inline Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ElementaryGrading load_grading(const std::string& path) { return grading_from_json(parse_json(read_file(path))); }

inline Json polynomial_to_json(const SparsePolynomial& p) {
  Json terms = Json::array();
  for (const auto& [mono, c] : p.terms()) {
    Json t;
    t["coef"] = to_string(c);
    Json factors = Json::array();
    for (const auto& f : mono.factors()) factors.push_back({{"var", f.var}, {"star", f.star}});
    t["factors"] = factors;
    terms.push_back(t);
  }
  return {{"terms", terms}};
}

inline SparsePolynomial polynomial_from_json(const Json& j) {
  SparsePolynomial p;
  for (const auto& t : detail::json_get<std::vector<Json>>(j, "terms")) {
    std::vector<StarFactor> factors;
    for (const auto& f : detail::json_get<std::vector<Json>>(t, "factors"))
      factors.push_back({detail::json_get<int>(f, "var"), detail::json_get<bool>(f, "star")});
    Rational c;
    try {
      c = Rational(detail::json_get<std::string>(t, "coef"));
    } catch (const std::runtime_error&) {
      throw ParseError("bad coefficient");
    }
    try {
      p.add(StarMonomial(std::move(factors)), c);
    } catch (const InvalidArgument& e) {
      throw ParseError(e.what());
    }
  }
  return p;
}

inline Json report_to_json(const CodimReport& r, bool timing = false) {
  Json j;
  j["n"] = r.n;
  j["m"] = r.m;
  j["grading"] = r.grading;
  j["involution"] = r.involution;
  j["method"] = r.method;
  j["value"] = r.value;
  j["mode"] = to_string(r.mode);
  j["rows"] = r.rows;
  j["cols"] = r.cols;
  Json blocks = Json::array();
  for (const auto& b : r.blocks)
    blocks.push_back({{"label", b.label},
                      {"multiplicity", b.multiplicity},
                      {"rows", b.rows},
                      {"cols", b.cols},
                      {"rank", b.rank},
                      {"mode", to_string(b.mode)}});
  j["blocks"] = blocks;
  if (timing) j["elapsed_ms"] = r.elapsed_ms;
  return j;
}

inline CodimReport report_from_json(const Json& j) {
  CodimReport r;
  r.n = detail::json_get<int>(j, "n");
  r.m = detail::json_get<int>(j, "m");
  r.grading = detail::json_get<std::string>(j, "grading");
  r.involution = detail::json_get<std::string>(j, "involution");
  r.method = detail::json_get<std::string>(j, "method");
  r.value = detail::json_get<std::uint64_t>(j, "value");
  r.mode = detail::rank_mode_from(detail::json_get<std::string>(j, "mode"));
  r.rows = detail::json_get<std::uint64_t>(j, "rows");
  r.cols = detail::json_get<std::uint64_t>(j, "cols");
  for (const auto& b : detail::json_get<std::vector<Json>>(j, "blocks"))
    r.blocks.push_back({detail::json_get<std::string>(b, "label"), detail::json_get<std::uint64_t>(b, "multiplicity"),
                        detail::json_get<std::size_t>(b, "rows"), detail::json_get<std::size_t>(b, "cols"),
                        detail::json_get<std::size_t>(b, "rank"),
                        detail::rank_mode_from(detail::json_get<std::string>(b, "mode"))});
  if (j.contains("elapsed_ms")) r.elapsed_ms = detail::json_get<double>(j, "elapsed_ms");
  return r;
}

inline Json verify_to_json(const VerifyResult& v) {
  return {{"target", v.target},   {"pass", v.pass}, {"expected", v.expected}, {"observed", v.observed},
          {"mode", to_string(v.mode)}, {"rows", v.rows}, {"cols", v.cols},     {"evidence", v.evidence}};
}

inline VerifyResult verify_from_json(const Json& j) {
  VerifyResult v;
  v.target = detail::json_get<std::string>(j, "target");
  v.pass = detail::json_get<bool>(j, "pass");
  v.expected = detail::json_get<std::uint64_t>(j, "expected");
  v.observed = detail::json_get<std::uint64_t>(j, "observed");
  v.mode = detail::rank_mode_from(detail::json_get<std::string>(j, "mode"));
  v.rows = detail::json_get<std::size_t>(j, "rows");
  v.cols = detail::json_get<std::size_t>(j, "cols");
  v.evidence = detail::json_get<std::string>(j, "evidence");
  return v;
}

inline Json table_to_json(const AsymptoticTable& t) {
  Json rows = Json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"m", r.m},
                    {"c_m", r.codimension},
                    {"target", to_string(r.target)},
                    {"ratio", r.ratio},
                    {"mode", to_string(r.mode)}});
  return {{"n", t.n},
          {"grading", t.grading},
          {"involution", t.involution},
          {"target_formula", t.target_formula},
          {"rows", rows}};
}

inline AsymptoticTable table_from_json(const Json& j) {
  AsymptoticTable t;
  t.n = detail::json_get<int>(j, "n");
  t.grading = detail::json_get<std::string>(j, "grading");
  t.involution = detail::json_get<std::string>(j, "involution");
  t.target_formula = detail::json_get<std::string>(j, "target_formula");
  for (const auto& r : detail::json_get<std::vector<Json>>(j, "rows")) {
    AsymptoticRow row;
    row.m = detail::json_get<int>(r, "m");
    row.codimension = detail::json_get<std::uint64_t>(r, "c_m");
    row.target = Rational(detail::json_get<std::string>(r, "target"));
    row.ratio = detail::json_get<std::string>(r, "ratio");
    row.mode = detail::rank_mode_from(detail::json_get<std::string>(r, "mode"));
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// Left-aligned columns separated by two spaces; no trailing blanks.
inline std::string aligned(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    if (width.size() < r.size()) width.resize(r.size(), 0);
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::string out;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t c = 0; c < r.size(); ++c) {
      line += r[c];
      if (c + 1 < r.size()) line += std::string(width[c] - r[c].size() + 2, ' ');
    }
    out += line + "\n";
  }
  return out;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

inline std::string csv(const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) out += (c ? "," : "") + csv_field(r[c]);
    out += "\n";
  }
  return out;
}

inline std::vector<std::vector<std::string>> block_rows(const CodimReport& r) {
  std::vector<std::vector<std::string>> rows{{"block", "multiplicity", "rows", "cols", "rank", "mode"}};
  for (const auto& b : r.blocks)
    rows.push_back({b.label, std::to_string(b.multiplicity), std::to_string(b.rows), std::to_string(b.cols),
                    std::to_string(b.rank), to_string(b.mode)});
  return rows;
}

inline std::string report_to_text(const CodimReport& r, bool timing = false) {
  std::string out = aligned({{"n", std::to_string(r.n)},
                             {"m", std::to_string(r.m)},
                             {"grading", r.grading},
                             {"involution", r.involution},
                             {"method", r.method},
                             {"value", std::to_string(r.value)},
                             {"mode", to_string(r.mode)},
                             {"rows", std::to_string(r.rows)},
                             {"cols", std::to_string(r.cols)}});
  if (timing) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(3) << r.elapsed_ms;
    out += "elapsed_ms  " + ss.str() + "\n";
  }
  out += "\n" + aligned(block_rows(r));
  return out;
}

inline std::string report_to_csv(const CodimReport& r) { return csv(block_rows(r)); }

inline std::vector<std::vector<std::string>> table_rows(const AsymptoticTable& t) {
  std::vector<std::vector<std::string>> rows{{"m", "c_m", "target", "ratio", "mode"}};
  for (const auto& r : t.rows)
    rows.push_back({std::to_string(r.m), std::to_string(r.codimension), to_string(r.target), r.ratio,
                    to_string(r.mode)});
  return rows;
}

inline std::string table_to_text(const AsymptoticTable& t) {
  return "n " + std::to_string(t.n) + "  grading " + t.grading + "  involution " + t.involution + "  target " +
         t.target_formula + "\n" + aligned(table_rows(t));
}

inline std::string table_to_csv(const AsymptoticTable& t) { return csv(table_rows(t)); }

inline std::vector<std::vector<std::string>> verify_rows(const std::vector<VerifyResult>& vs) {
  std::vector<std::vector<std::string>> rows{{"target", "result", "expected", "observed", "mode", "evidence"}};
  for (const auto& v : vs)
    rows.push_back({v.target, v.pass ? "pass" : "FAIL", std::to_string(v.expected), std::to_string(v.observed),
                    to_string(v.mode), v.evidence});
  return rows;
}

}  // namespace utstar
