#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

#include "cgra/solver.hpp"

namespace cgra {

namespace {

constexpr std::size_t kTermsPerLine = 8;

void write_terms(std::ostringstream& os, const std::vector<Term>& terms, const IlpModel& model) {
  if (terms.empty()) {
    // LP rows need at least one term; a zero coefficient keeps the row.
    if (model.var_count() > 0) os << " 0 " << model.name(0);
    return;
  }
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i > 0 && i % kTermsPerLine == 0) os << "\n   ";
    const Term& t = terms[i];
    os << ' ' << (t.coef < 0 ? '-' : '+') << ' ' << (t.coef < 0 ? -t.coef : t.coef) << ' ' << model.name(t.var);
  }
}

}  // namespace

std::string export_lp(const IlpModel& model) {
  std::ostringstream os;
  os << "\\ cgramap ILP model\n";
  const auto& m = model.meta;
  if (!m.variant.empty())
    os << "\\ variant " << m.variant << " nn " << m.nn << " k " << m.k << " paths_per_connection "
       << m.paths_per_connection << " overuse_limit " << m.overuse_limit << "\n";
  if (model.infeasible_by_construction()) os << "\\ infeasible " << model.infeasible_reason() << "\n";
  os << "Minimize\n obj:";
  write_terms(os, model.objective(), model);
  os << "\nSubject To\n";
  const auto& cons = model.constraints();
  for (std::size_t i = 0; i < cons.size(); ++i) {
    const auto& c = cons[i];
    os << ' ' << constraint_tag_name(c.tag) << '_' << i << ':';
    write_terms(os, c.terms, model);
    os << ' ' << (c.rel == Relation::Le ? "<=" : c.rel == Relation::Ge ? ">=" : "=") << ' ' << c.rhs << '\n';
  }
  if (model.var_count() > 0) {
    os << "Binaries\n";
    for (int i = 0; i < model.var_count(); ++i) os << (i % kTermsPerLine == 0 ? (i ? "\n " : " ") : " ") << model.name(i);
    os << '\n';
  }
  os << "End\n";
  return os.str();
}

LpParseError::LpParseError(int line, const std::string& what)
    : std::runtime_error("LP line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

enum class Section { None, Objective, Constraints, Bounds, Binaries, Generals, End };

struct Tok {
  std::string text;
  int line;
};

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || std::string_view("!\"#$%&()/,.;?@_`'{}|~").find(c) != std::string_view::npos;
}

/// Splits into names, numbers, operators and ':' while tracking lines.
std::vector<Tok> tokenize(std::string_view text, std::vector<std::string>& comments) {
  std::vector<Tok> toks;
  int line = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '\\') {
      std::size_t e = text.find('\n', i);
      if (e == std::string_view::npos) e = text.size();
      comments.emplace_back(text.substr(i + 1, e - i - 1));
      i = e;
    } else if (c == '<' || c == '>' || c == '=') {
      std::string op(1, c);
      if (i + 1 < text.size() && (text[i + 1] == '=' || text[i + 1] == '<' || text[i + 1] == '>')) op += text[++i];
      ++i;
      toks.push_back({op, line});
    } else if (c == '+' || c == '-' || c == ':') {
      toks.push_back({std::string(1, c), line});
      ++i;
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t j = i;
      while (j < text.size() && (std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '.')) ++j;
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) {
          j = k;
          while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        }
      }
      toks.push_back({std::string(text.substr(i, j - i)), line});
      i = j;
    } else if (is_name_char(c)) {
      std::size_t j = i;
      while (j < text.size() && (is_name_char(text[j]) || text[j] == '[' || text[j] == ']' || text[j] == '~')) ++j;
      toks.push_back({std::string(text.substr(i, j - i)), line});
      i = j;
    } else {
      throw LpParseError(line, std::string("unexpected character '") + c + "'");
    }
  }
  return toks;
}

bool is_number(const std::string& s) {
  return !s.empty() && (std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '.');
}

std::int64_t to_int(const Tok& t) {
  double v = std::stod(t.text);
  double r = std::round(v);
  if (std::abs(v - r) > 1e-9) throw LpParseError(t.line, "non-integer number '" + t.text + "'");
  return static_cast<std::int64_t>(r);
}

Section section_of(const std::vector<Tok>& toks, std::size_t& i) {
  std::string w = lower(toks[i].text);
  auto next_is = [&](const char* s) { return i + 1 < toks.size() && lower(toks[i + 1].text) == s; };
  if (w == "minimize" || w == "minimise" || w == "min" || w == "minimum") return Section::Objective;
  if (w == "maximize" || w == "maximise" || w == "max" || w == "maximum") {
    throw LpParseError(toks[i].line, "maximisation is not supported");
  }
  if ((w == "subject" || w == "such") && next_is("to")) {
    ++i;
    return Section::Constraints;
  }
  if (w == "st" || w == "s.t." || w == "st.") return Section::Constraints;
  if (w == "bounds" || w == "bound") return Section::Bounds;
  if (w == "binaries" || w == "binary" || w == "bin") return Section::Binaries;
  if (w == "generals" || w == "general" || w == "gen" || w == "integers") return Section::Generals;
  if (w == "end") return Section::End;
  return Section::None;
}

struct RawRow {
  std::string label;
  std::vector<std::pair<std::int64_t, std::string>> terms;
  Relation rel = Relation::Le;
  std::int64_t rhs = 0;
  int line = 0;
};

ConstraintTag tag_from_label(const std::string& label) {
  auto us = label.rfind('_');
  if (us == std::string::npos) return ConstraintTag::Generic;
  std::string prefix = label.substr(0, us);
  for (int t = 0; t < kConstraintTagCount; ++t)
    if (constraint_tag_name(static_cast<ConstraintTag>(t)) == prefix) return static_cast<ConstraintTag>(t);
  return ConstraintTag::Generic;
}

}  // namespace

IlpModel import_lp(std::string_view text) {
  std::vector<std::string> comments;
  std::vector<Tok> toks = tokenize(text, comments);

  std::vector<std::pair<std::int64_t, std::string>> objective;
  std::vector<RawRow> rows;
  std::vector<std::string> binaries;
  Section sec = Section::None;
  std::size_t i = 0;
  bool seen_objective = false;

  // Linear expression followed (in constraints) by a relation and rhs.
  auto parse_expr = [&](std::vector<std::pair<std::int64_t, std::string>>& out, bool stop_at_relation) {
    while (i < toks.size()) {
      std::size_t save = i;
      if (section_of(toks, i) != Section::None) {
        i = save;
        return;
      }
      i = save;
      const Tok& t = toks[i];
      if (stop_at_relation && (t.text[0] == '<' || t.text[0] == '>' || t.text[0] == '=')) return;
      // A label "name:" starts the next row.
      if (i + 1 < toks.size() && toks[i + 1].text == ":" && !is_number(t.text)) return;
      std::int64_t sign = 1;
      while (i < toks.size() && (toks[i].text == "+" || toks[i].text == "-")) {
        if (toks[i].text == "-") sign = -sign;
        ++i;
      }
      if (i >= toks.size()) throw LpParseError(t.line, "dangling sign");
      std::int64_t coef = 1;
      if (is_number(toks[i].text)) {
        coef = to_int(toks[i]);
        ++i;
        if (i >= toks.size() || is_number(toks[i].text) || toks[i].text == ":" ||
            toks[i].text[0] == '<' || toks[i].text[0] == '>' || toks[i].text[0] == '=') {
          if (!stop_at_relation) throw LpParseError(toks[i - 1].line, "constant in objective");
          throw LpParseError(toks[i - 1].line, "constant on the left-hand side");
        }
      }
      out.push_back({sign * coef, toks[i].text});
      ++i;
    }
  };

  while (i < toks.size()) {
    Section s = section_of(toks, i);
    if (s != Section::None) {
      sec = s;
      ++i;
      if (sec == Section::End) break;
      if (sec == Section::Generals) throw LpParseError(toks[i - 1].line, "general integer variables are not supported");
      if (sec == Section::Objective) {
        if (seen_objective) throw LpParseError(toks[i - 1].line, "second objective section");
        seen_objective = true;
        if (i + 1 < toks.size() && toks[i + 1].text == ":") i += 2;
        parse_expr(objective, false);
      }
      continue;
    }
    switch (sec) {
      case Section::Constraints: {
        RawRow row;
        row.line = toks[i].line;
        if (i + 1 < toks.size() && toks[i + 1].text == ":") {
          row.label = toks[i].text;
          i += 2;
        }
        parse_expr(row.terms, true);
        if (i >= toks.size()) throw LpParseError(row.line, "row without relation");
        std::string op = toks[i].text;
        if (op == "<=" || op == "=<" || op == "<") row.rel = Relation::Le;
        else if (op == ">=" || op == "=>" || op == ">") row.rel = Relation::Ge;
        else if (op == "=") row.rel = Relation::Eq;
        else throw LpParseError(toks[i].line, "expected a relation, got '" + op + "'");
        ++i;
        std::int64_t sign = 1;
        while (i < toks.size() && (toks[i].text == "+" || toks[i].text == "-")) {
          if (toks[i].text == "-") sign = -sign;
          ++i;
        }
        if (i >= toks.size() || !is_number(toks[i].text)) throw LpParseError(row.line, "missing right-hand side");
        row.rhs = sign * to_int(toks[i]);
        ++i;
        rows.push_back(std::move(row));
        break;
      }
      case Section::Binaries: binaries.push_back(toks[i++].text); break;
      case Section::Bounds: {
        // Only the trivial 0 <= x <= 1 style bounds of binaries are accepted.
        const Tok& t = toks[i++];
        if (!(is_number(t.text) || t.text == "<=" || t.text == ">=" || t.text == "=" || t.text == "-" ||
              t.text == "+" || lower(t.text) == "free" || lower(t.text) == "inf" || lower(t.text) == "infinity"))
          continue;
        break;
      }
      default: throw LpParseError(toks[i].line, "text outside any section: '" + toks[i].text + "'");
    }
  }

  IlpModel model;
  std::map<std::string, int> index;
  for (const auto& b : binaries) {
    if (index.count(b)) continue;
    int v = model.add_variable(VarId::x(model.var_count()), b);
    index.emplace(b, v);
  }
  auto resolve = [&](const std::string& name, int line) {
    auto it = index.find(name);
    if (it == index.end()) throw LpParseError(line, "variable '" + name + "' is not declared binary");
    return it->second;
  };
  for (const auto& row : rows) {
    LinearConstraint c;
    c.rel = row.rel;
    c.rhs = row.rhs;
    c.tag = tag_from_label(row.label);
    for (const auto& [coef, name] : row.terms) c.terms.push_back({coef, resolve(name, row.line)});
    model.add_constraint(std::move(c));
  }
  std::vector<Term> obj;
  for (const auto& [coef, name] : objective) obj.push_back({coef, resolve(name, 0)});
  model.set_objective(std::move(obj));

  for (const auto& cm : comments) {
    std::istringstream is(cm);
    std::string w;
    is >> w;
    if (w == "variant") {
      std::string k;
      is >> model.meta.variant;
      while (is >> k) {
        int v = 0;
        is >> v;
        if (k == "nn") model.meta.nn = v;
        else if (k == "k") model.meta.k = v;
        else if (k == "paths_per_connection") model.meta.paths_per_connection = v;
        else if (k == "overuse_limit") model.meta.overuse_limit = v;
      }
    } else if (w == "infeasible") {
      std::string reason;
      std::getline(is >> std::ws, reason);
      model.mark_infeasible(reason);
    }
  }
  return model;
}

}  // namespace cgra
