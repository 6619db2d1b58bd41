#pragma once

// Scenario documents: a groupoid (explicit tables or a transformation
// block), a bundle, an action and a cocycle, in a block-structured text
// format:
//
//   format_version = 1
//   id = rot3_meanzero
//   [transformation]
//   T = 1 2 0
//   K = 12
//   K_list = 3 6 12
//   [bundle]
//   field = real
//   dim = 1
//   [action]
//   kind = trivial
//   [cocycle]
//   kind = birkhoff
//   potential = 1 -1 0
//
// Explicit groupoids use [units] (count, unit_arrows), [arrows]
// (`<id> = <src> <rng> <inverse>`) and [compose] (`<left> <right> =
// <result>`). Matrices are row-major; complex scalars are written as
// interleaved re im pairs. `#` starts a comment.

#include <charconv>
#include <complex>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cocycle_lab/bundle.hpp"
#include "cocycle_lab/convexity.hpp"
#include "cocycle_lab/groupoid.hpp"
#include "cocycle_lab/transformation.hpp"

namespace cocycle_lab {

inline constexpr int kScenarioFormatVersion = 1;

enum class ActionKind { trivial, explicit_matrices, generators };
enum class CocycleKind { zero, explicit_values, coboundary, birkhoff, perturbed };

struct Tolerances {
  double algebra = kDefaultTol;
  double solve = 1e-7;
  friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

template <Scalar S>
struct ActionSpec {
  ActionKind kind = ActionKind::trivial;
  std::vector<std::pair<ArrowId, Mat<S>>> mats;
};

template <Scalar S>
struct CocycleSpec {
  CocycleKind kind = CocycleKind::zero;
  /// What a perturbed cocycle perturbs (zero, explicit, coboundary or birkhoff).
  CocycleKind base = CocycleKind::zero;
  std::vector<std::pair<ArrowId, Vec<S>>> values;
  std::optional<Section<S>> section;
  std::vector<S> potential;
  ArrowId arrow = 0;
  double delta = 0.0;
  std::size_t coord = 0;
};

template <Scalar S>
struct Model {
  ActionSpec<S> action_spec;
  CocycleSpec<S> cocycle_spec;
  IsometricAction<S> action;
  Cocycle<S> cocycle;
};

struct TransformationSpec {
  TransformationSystem system;
  long window = 0;
  std::vector<long> windows;
};

struct Scenario {
  int format_version = kScenarioFormatVersion;
  std::string id;
  std::uint64_t seed = 0;
  std::variant<FiniteGroupoid, WindowedTG> groupoid;
  std::optional<TransformationSpec> transformation;
  HilbertBundle bundle;
  std::variant<Model<double>, Model<std::complex<double>>> model;
  Tolerances tolerances;
  std::optional<UnitMetric> metric;

  bool is_transformation() const { return transformation.has_value(); }
  std::size_t n_units() const {
    return std::visit([](const auto& g) { return g.n_units(); }, groupoid);
  }
  std::size_t n_arrows() const {
    return std::visit([](const auto& g) { return g.n_arrows(); }, groupoid);
  }
};

/// Default windows K/4, K/2, K (deduplicated).
inline std::vector<long> default_windows(long window) {
  std::vector<long> out;
  for (long k : {window / 4, window / 2, window})
    if (out.empty() || k > out.back()) out.push_back(k);
  return out;
}

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error("cannot format number");
  return std::string(buf, end);
}

template <Scalar S>
void append_scalars(std::string& out, const S& v) {
  if constexpr (is_complex_v<S>) {
    out += format_double(v.real());
    out += ' ';
    out += format_double(v.imag());
  } else {
    out += format_double(v);
  }
}

template <class Range>
std::string join_scalars(const Range& r) {
  std::string out;
  bool first = true;
  for (const auto& v : r) {
    if (!first) out += ' ';
    first = false;
    append_scalars(out, v);
  }
  return out;
}

template <class Range>
std::string join_ints(const Range& r) {
  std::string out;
  bool first = true;
  for (const auto& v : r) {
    if (!first) out += ' ';
    first = false;
    out += std::to_string(v);
  }
  return out;
}

struct Line {
  std::size_t number = 0;
  std::string key;
  std::vector<std::string> args;
  std::string value;
};

struct Document {
  std::vector<Line> top;
  std::map<std::string, std::vector<Line>> blocks;
  std::map<std::string, std::size_t> block_line;

  const std::vector<Line>* block(const std::string& name) const {
    auto it = blocks.find(name);
    return it == blocks.end() ? nullptr : &it->second;
  }
};

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

inline const std::set<std::string>& known_blocks() {
  static const std::set<std::string> names{"units",  "arrows", "compose", "transformation", "bundle",
                                           "action", "cocycle", "metric", "tolerances"};
  return names;
}

inline Document tokenize(std::string_view text) {
  Document doc;
  std::vector<Line>* current = &doc.top;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++number;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(number, "unterminated block header");
      const std::string name = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!known_blocks().count(name)) throw ParseError(number, "unknown block [" + name + "]");
      if (doc.blocks.count(name)) throw ParseError(number, "block [" + name + "] appears twice");
      current = &doc.blocks[name];
      doc.block_line[name] = number;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(number, "expected `key = value`");
    auto lhs = split_ws(line.substr(0, eq));
    if (lhs.empty()) throw ParseError(number, "missing key");
    Line l;
    l.number = number;
    l.key = lhs.front();
    l.args.assign(lhs.begin() + 1, lhs.end());
    l.value = trim(std::string_view(line).substr(eq + 1));
    current->push_back(std::move(l));
  }
  return doc;
}

inline double parse_double(const std::string& tok, std::size_t line) {
  double v = 0.0;
  const char* b = tok.data();
  const char* e = tok.data() + tok.size();
  if (!tok.empty() && *b == '+') ++b;
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) throw ParseError(line, "expected a decimal number, got `" + tok + "`");
  return v;
}

inline long parse_long(const std::string& tok, std::size_t line) {
  long v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw ParseError(line, "expected an integer, got `" + tok + "`");
  return v;
}

inline std::size_t parse_index(const std::string& tok, std::size_t line) {
  const long v = parse_long(tok, line);
  if (v < 0) throw ParseError(line, "expected a non-negative integer, got `" + tok + "`");
  return static_cast<std::size_t>(v);
}

inline std::vector<double> parse_doubles(const std::string& s, std::size_t line) {
  std::vector<double> out;
  for (const auto& tok : split_ws(s)) out.push_back(parse_double(tok, line));
  return out;
}

inline std::vector<std::size_t> parse_indices(const std::string& s, std::size_t line) {
  std::vector<std::size_t> out;
  for (const auto& tok : split_ws(s)) out.push_back(parse_index(tok, line));
  return out;
}

template <Scalar S>
std::vector<S> parse_scalars(const std::string& s, std::size_t line) {
  const auto raw = parse_doubles(s, line);
  if constexpr (is_complex_v<S>) {
    if (raw.size() % 2 != 0) throw ParseError(line, "complex values need re im pairs");
    std::vector<S> out;
    for (std::size_t i = 0; i < raw.size(); i += 2) out.emplace_back(raw[i], raw[i + 1]);
    return out;
  } else {
    return raw;
  }
}

template <Scalar S>
Vec<S> parse_vector(const std::string& s, std::size_t line, Eigen::Index expected) {
  const auto vals = parse_scalars<S>(s, line);
  if (static_cast<Eigen::Index>(vals.size()) != expected)
    throw ParseError(line, "expected " + std::to_string(expected) + " coordinates, got " +
                               std::to_string(vals.size()));
  Vec<S> v(expected);
  for (Eigen::Index i = 0; i < expected; ++i) v(i) = vals[static_cast<std::size_t>(i)];
  return v;
}

inline const Line& require(const std::vector<Line>& block, const std::string& key, const std::string& where,
                           std::size_t header_line) {
  for (const auto& l : block)
    if (l.key == key && l.args.empty()) return l;
  throw ParseError(header_line, "[" + where + "] is missing `" + key + "`");
}

inline const Line* find_key(const std::vector<Line>& block, const std::string& key) {
  for (const auto& l : block)
    if (l.key == key && l.args.empty()) return &l;
  return nullptr;
}

inline FiniteGroupoid parse_table(const Document& doc) {
  const auto* units = doc.block("units");
  const auto* arrows = doc.block("arrows");
  const auto* compose = doc.block("compose");
  if (!units || !arrows || !compose)
    throw ValidationError("explicit groupoids need [units], [arrows] and [compose]");
  const auto& count_line = require(*units, "count", "units", doc.block_line.at("units"));
  const std::size_t n_units = parse_index(count_line.value, count_line.number);
  const auto& ua = require(*units, "unit_arrows", "units", doc.block_line.at("units"));
  auto unit_arrows = parse_indices(ua.value, ua.number);

  const std::size_t n_arrows = arrows->size();
  std::vector<std::pair<UnitId, UnitId>> sr(n_arrows);
  std::vector<ArrowId> inverse(n_arrows);
  std::vector<bool> seen(n_arrows, false);
  for (const auto& l : *arrows) {
    if (!l.args.empty()) throw ParseError(l.number, "arrow lines read `<id> = <src> <rng> <inverse>`");
    const std::size_t id = parse_index(l.key, l.number);
    const auto f = parse_indices(l.value, l.number);
    if (f.size() != 3) throw ParseError(l.number, "arrow lines read `<id> = <src> <rng> <inverse>`");
    if (id >= n_arrows)
      throw ValidationError("arrow id " + std::to_string(id) + " out of range (" + std::to_string(n_arrows) +
                            " arrows declared)");
    if (seen[id]) throw ValidationError("arrow id " + std::to_string(id) + " declared twice");
    seen[id] = true;
    sr[id] = {f[0], f[1]};
    inverse[id] = f[2];
  }
  std::vector<FiniteGroupoid::ComposeEntry> table;
  table.reserve(compose->size());
  for (const auto& l : *compose) {
    if (l.args.size() != 1) throw ParseError(l.number, "compose lines read `<left> <right> = <result>`");
    table.push_back({parse_index(l.key, l.number), parse_index(l.args[0], l.number), parse_index(l.value, l.number)});
  }
  return FiniteGroupoid(n_units, std::move(sr), std::move(unit_arrows), std::move(inverse), table);
}

inline TransformationSpec parse_transformation(const Document& doc) {
  const auto& block = *doc.block("transformation");
  const std::size_t header = doc.block_line.at("transformation");
  const auto& t = require(block, "T", "transformation", header);
  const auto map = parse_indices(t.value, t.number);
  TransformationSpec spec{TransformationSystem(map), 0, {}};
  const auto& k = require(block, "K", "transformation", header);
  spec.window = parse_long(k.value, k.number);
  if (spec.window < 0) throw ParseError(k.number, "K must be non-negative");
  if (const auto* kl = find_key(block, "K_list")) {
    for (const auto& tok : split_ws(kl->value)) spec.windows.push_back(parse_long(tok, kl->number));
    if (spec.windows.empty()) throw ParseError(kl->number, "K_list is empty");
    for (std::size_t i = 0; i < spec.windows.size(); ++i) {
      if (spec.windows[i] < 0 || (i > 0 && spec.windows[i] <= spec.windows[i - 1]))
        throw ParseError(kl->number, "K_list must be strictly increasing and non-negative");
    }
    if (spec.windows.back() > spec.window) spec.window = spec.windows.back();
  } else {
    spec.windows = default_windows(spec.window);
  }
  return spec;
}

inline HilbertBundle parse_bundle(const Document& doc, std::size_t n_units) {
  const auto* block = doc.block("bundle");
  HilbertBundle e;
  if (!block) return HilbertBundle::constant(n_units, 1);
  if (const auto* f = find_key(*block, "field")) {
    if (f->value == "real") {
      e.field = Field::real;
    } else if (f->value == "complex") {
      e.field = Field::complex;
    } else {
      throw ParseError(f->number, "field must be `real` or `complex`");
    }
  }
  const auto* dims = find_key(*block, "dims");
  const auto* dim = find_key(*block, "dim");
  if (dims && dim) throw ParseError(dim->number, "give either `dim` or `dims`, not both");
  if (dims) {
    e.dims = parse_indices(dims->value, dims->number);
    if (e.dims.size() != n_units)
      throw ValidationError("bundle declares " + std::to_string(e.dims.size()) + " fiber dimensions for " +
                            std::to_string(n_units) + " units");
  } else {
    const std::size_t d = dim ? parse_index(dim->value, dim->number) : 1;
    e.dims.assign(n_units, d);
  }
  return e;
}

inline ActionKind parse_action_kind(const Line& l) {
  if (l.value == "trivial") return ActionKind::trivial;
  if (l.value == "explicit") return ActionKind::explicit_matrices;
  if (l.value == "generators") return ActionKind::generators;
  throw ParseError(l.number, "action kind must be trivial, explicit or generators");
}

inline CocycleKind parse_cocycle_kind(const Line& l) {
  if (l.value == "zero") return CocycleKind::zero;
  if (l.value == "explicit") return CocycleKind::explicit_values;
  if (l.value == "coboundary") return CocycleKind::coboundary;
  if (l.value == "birkhoff") return CocycleKind::birkhoff;
  if (l.value == "perturbed") return CocycleKind::perturbed;
  throw ParseError(l.number, "cocycle kind must be zero, explicit, coboundary, birkhoff or perturbed");
}

inline const char* to_string(ActionKind k) {
  switch (k) {
    case ActionKind::trivial: return "trivial";
    case ActionKind::explicit_matrices: return "explicit";
    case ActionKind::generators: return "generators";
  }
  return "?";
}

inline const char* to_string(CocycleKind k) {
  switch (k) {
    case CocycleKind::zero: return "zero";
    case CocycleKind::explicit_values: return "explicit";
    case CocycleKind::coboundary: return "coboundary";
    case CocycleKind::birkhoff: return "birkhoff";
    case CocycleKind::perturbed: return "perturbed";
  }
  return "?";
}

inline void check_arrow_id(ArrowId a, std::size_t n_arrows, const char* what) {
  if (a >= n_arrows)
    throw ValidationError(std::string(what) + " references arrow id " + std::to_string(a) + " of " +
                          std::to_string(n_arrows));
}

template <Scalar S, Groupoid G>
ActionSpec<S> parse_action(const Document& doc, const G& g, const HilbertBundle& e) {
  ActionSpec<S> spec;
  const auto* block = doc.block("action");
  if (!block) return spec;
  spec.kind = parse_action_kind(require(*block, "kind", "action", doc.block_line.at("action")));
  for (const auto& l : *block) {
    if (l.key == "kind" && l.args.empty()) continue;
    if (!l.args.empty()) throw ParseError(l.number, "matrix lines read `<arrow> = <row-major entries>`");
    if (spec.kind == ActionKind::trivial) throw ParseError(l.number, "a trivial action takes no matrices");
    const ArrowId a = parse_index(l.key, l.number);
    check_arrow_id(a, g.n_arrows(), "action matrix");
    const Eigen::Index rows = e.dim(g.rng(a));
    const Eigen::Index cols = e.dim(g.src(a));
    const auto vals = parse_scalars<S>(l.value, l.number);
    if (static_cast<Eigen::Index>(vals.size()) != rows * cols)
      throw ValidationError("matrix for arrow " + std::to_string(a) + " has " + std::to_string(vals.size()) +
                            " entries, fibers need " + std::to_string(rows) + "x" + std::to_string(cols));
    Mat<S> m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = vals[static_cast<std::size_t>(i * cols + j)];
    spec.mats.emplace_back(a, std::move(m));
  }
  return spec;
}

template <Scalar S, Groupoid G>
CocycleSpec<S> parse_cocycle(const Document& doc, const G& g, const HilbertBundle& e) {
  CocycleSpec<S> spec;
  const auto* block = doc.block("cocycle");
  if (!block) return spec;
  spec.kind = parse_cocycle_kind(require(*block, "kind", "cocycle", doc.block_line.at("cocycle")));
  spec.base = spec.kind == CocycleKind::perturbed ? CocycleKind::zero : spec.kind;
  for (const auto& l : *block) {
    if (l.key == "kind" && l.args.empty()) continue;
    if (l.key == "value" && l.args.size() == 1) {
      const ArrowId a = parse_index(l.args[0], l.number);
      check_arrow_id(a, g.n_arrows(), "cocycle value");
      spec.values.emplace_back(a, parse_vector<S>(l.value, l.number, e.dim(g.rng(a))));
    } else if (l.key == "section" && l.args.size() == 1) {
      const UnitId x = parse_index(l.args[0], l.number);
      if (x >= g.n_units()) throw ValidationError("section references unit " + std::to_string(x));
      if (!spec.section) spec.section = Section<S>::zero(e);
      spec.section->values[x] = parse_vector<S>(l.value, l.number, e.dim(x));
    } else if (l.key == "potential" && l.args.empty()) {
      spec.potential = parse_scalars<S>(l.value, l.number);
    } else if (l.key == "base" && l.args.empty()) {
      spec.base = parse_cocycle_kind(l);
      if (spec.base == CocycleKind::perturbed) throw ParseError(l.number, "a perturbation cannot be its own base");
    } else if (l.key == "arrow" && l.args.empty()) {
      spec.arrow = parse_index(l.value, l.number);
      check_arrow_id(spec.arrow, g.n_arrows(), "perturbation");
    } else if (l.key == "delta" && l.args.empty()) {
      spec.delta = parse_double(l.value, l.number);
    } else if (l.key == "coord" && l.args.empty()) {
      spec.coord = parse_index(l.value, l.number);
    } else {
      throw ParseError(l.number, "unknown cocycle entry `" + l.key + "`");
    }
  }
  return spec;
}

}  // namespace detail

/// Builds the action and cocycle a model's specs describe.
template <Scalar S, Groupoid G>
void resolve_model(Model<S>& model, const G& g, const HilbertBundle& e, const std::optional<TransformationSpec>& ts,
                   double tol) {
  switch (model.action_spec.kind) {
    case ActionKind::trivial:
      model.action = IsometricAction<S>::trivial(g, e);
      break;
    case ActionKind::explicit_matrices: {
      std::vector<std::optional<Mat<S>>> mats(g.n_arrows());
      for (const auto& [a, m] : model.action_spec.mats) {
        if (mats[a]) throw ValidationError("action lists arrow " + std::to_string(a) + " twice");
        mats[a] = m;
      }
      model.action.mats.clear();
      for (ArrowId a = 0; a < g.n_arrows(); ++a) {
        if (!mats[a]) throw ValidationError("explicit action is missing arrow " + std::to_string(a));
        model.action.mats.push_back(std::move(*mats[a]));
      }
      break;
    }
    case ActionKind::generators:
      model.action = complete_action<S>(g, e, model.action_spec.mats, tol);
      break;
  }

  const auto& spec = model.cocycle_spec;
  auto build = [&](CocycleKind kind) -> Cocycle<S> {
    switch (kind) {
      case CocycleKind::zero:
        return Cocycle<S>::zero(g, e);
      case CocycleKind::explicit_values: {
        auto c = Cocycle<S>::zero(g, e);
        std::vector<bool> seen(g.n_arrows(), false);
        for (const auto& [a, v] : spec.values) {
          if (seen[a]) throw ValidationError("cocycle lists arrow " + std::to_string(a) + " twice");
          seen[a] = true;
          c.values[a] = v;
        }
        for (ArrowId a = 0; a < g.n_arrows(); ++a)
          if (!seen[a]) throw ValidationError("explicit cocycle is missing arrow " + std::to_string(a));
        return c;
      }
      case CocycleKind::coboundary:
        if (!spec.section) throw ValidationError("coboundary cocycle needs `section` lines");
        return coboundary(g, model.action, *spec.section);
      case CocycleKind::birkhoff: {
        if constexpr (std::is_same_v<G, WindowedTG>) {
          if (spec.potential.size() != g.n_units())
            throw ValidationError("potential has " + std::to_string(spec.potential.size()) + " values for " +
                                  std::to_string(g.n_units()) + " points");
          for (UnitId x = 0; x < g.n_units(); ++x)
            if (e.dim(x) != 1) throw ValidationError("birkhoff cocycles live on the 1-dimensional bundle");
          if (model.action_spec.kind != ActionKind::trivial)
            throw ValidationError("birkhoff cocycles need the trivial action");
          return birkhoff_cocycle_field<S>(g, spec.potential);
        } else {
          (void)ts;
          throw ValidationError("birkhoff cocycles need a [transformation] groupoid");
        }
      }
      case CocycleKind::perturbed:
        break;
    }
    throw ValidationError("invalid cocycle base");
  };

  if (spec.kind == CocycleKind::perturbed) {
    model.cocycle = build(spec.base);
    auto& v = model.cocycle.values.at(spec.arrow);
    if (spec.coord >= static_cast<std::size_t>(v.size()))
      throw ValidationError("perturbation coordinate " + std::to_string(spec.coord) + " outside the fiber");
    v(static_cast<Eigen::Index>(spec.coord)) += S(spec.delta);
  } else {
    model.cocycle = build(spec.kind);
  }
}

namespace detail {

inline std::string describe(const ValidationReport& rep, std::size_t limit = 5) {
  std::string out;
  for (std::size_t i = 0; i < rep.violations.size() && i < limit; ++i) {
    const auto& v = rep.violations[i];
    if (!out.empty()) out += "; ";
    out += v.axiom + " at arrows";
    for (ArrowId a : v.arrows) out += " " + std::to_string(a);
  }
  if (rep.violations.size() > limit)
    out += "; ... (" + std::to_string(rep.violations.size() + rep.dropped) + " violations)";
  return out;
}

}  // namespace detail

/// Groupoid and action axioms; throws ValidationError naming offending ids.
inline void validate_structure(const Scenario& sc) {
  std::visit(
      [&](const auto& g) {
        const auto rep = validate_groupoid(g);
        if (!rep.ok()) throw ValidationError("groupoid axioms fail: " + detail::describe(rep));
        std::visit(
            [&](const auto& model) {
              ValidationReport arep;
              try {
                arep = validate_action(g, sc.bundle, model.action, sc.tolerances.algebra);
              } catch (const ShapeMismatch& ex) {
                throw ValidationError(ex.what());
              }
              if (!arep.ok()) throw ValidationError("action axioms fail: " + detail::describe(arep));
              if (model.cocycle.values.size() != g.n_arrows())
                throw ValidationError("cocycle must have one value per arrow");
              for (ArrowId a = 0; a < g.n_arrows(); ++a)
                if (model.cocycle(a).size() != sc.bundle.dim(g.rng(a)))
                  throw ValidationError("cocycle value of arrow " + std::to_string(a) +
                                        " does not live in its range fiber");
            },
            sc.model);
      },
      sc.groupoid);
  if (sc.metric) (void)sc.metric->distances();
}

/// Parses and fully resolves a scenario document. ParseError carries the
/// line; structural problems raise ValidationError here, not later.
inline Scenario parse_scenario(std::string_view text) {
  using namespace detail;
  const Document doc = tokenize(text);
  Scenario sc;

  bool have_version = false;
  for (const auto& l : doc.top) {
    if (l.key == "format_version" && l.args.empty()) {
      sc.format_version = static_cast<int>(parse_long(l.value, l.number));
      if (sc.format_version != kScenarioFormatVersion)
        throw ParseError(l.number, "unsupported format_version " + l.value);
      have_version = true;
    } else if (l.key == "id" && l.args.empty()) {
      sc.id = l.value;
    } else if (l.key == "seed" && l.args.empty()) {
      sc.seed = static_cast<std::uint64_t>(parse_index(l.value, l.number));
    } else {
      throw ParseError(l.number, "unknown top-level entry `" + l.key + "`");
    }
  }
  if (!have_version) throw ParseError(1, "missing leading `format_version`");

  const bool table = doc.block("units") || doc.block("arrows") || doc.block("compose");
  const bool transformation = doc.block("transformation") != nullptr;
  if (table == transformation)
    throw ValidationError("give exactly one groupoid: explicit tables or a [transformation] block");
  if (transformation) {
    sc.transformation = parse_transformation(doc);
    sc.groupoid = build_transformation_groupoid(sc.transformation->system, sc.transformation->window);
  } else {
    sc.groupoid = parse_table(doc);
  }

  if (const auto* tol = doc.block("tolerances")) {
    for (const auto& l : *tol) {
      if (l.key == "algebra" && l.args.empty()) {
        sc.tolerances.algebra = parse_double(l.value, l.number);
      } else if (l.key == "solve" && l.args.empty()) {
        sc.tolerances.solve = parse_double(l.value, l.number);
      } else {
        throw ParseError(l.number, "unknown tolerance `" + l.key + "`");
      }
    }
  }

  sc.bundle = parse_bundle(doc, sc.n_units());
  std::visit(
      [&](const auto& g) {
        auto fill = [&]<Scalar S>(Model<S> model) {
          model.action_spec = parse_action<S>(doc, g, sc.bundle);
          model.cocycle_spec = parse_cocycle<S>(doc, g, sc.bundle);
          try {
            resolve_model(model, g, sc.bundle, sc.transformation, sc.tolerances.algebra);
          } catch (const ShapeMismatch& ex) {
            throw ValidationError(ex.what());
          }
          sc.model = std::move(model);
        };
        if (sc.bundle.field == Field::real) {
          fill(Model<double>{});
        } else {
          fill(Model<std::complex<double>>{});
        }
      },
      sc.groupoid);

  if (const auto* metric = doc.block("metric")) {
    UnitMetric m{sc.n_units(), {}};
    for (const auto& l : *metric) {
      if (l.key != "edge" || l.args.size() != 2) throw ParseError(l.number, "metric lines read `edge <a> <b> = <w>`");
      m.edges.push_back({parse_index(l.args[0], l.number), parse_index(l.args[1], l.number),
                         parse_double(l.value, l.number)});
    }
    sc.metric = std::move(m);
  }

  validate_structure(sc);
  return sc;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline Scenario load_scenario(const std::string& path) { return parse_scenario(read_file(path)); }

/// Canonical text of a scenario; parse_scenario(to_text(s)) reproduces s.
inline std::string to_text(const Scenario& sc) {
  using detail::format_double;
  using detail::join_ints;
  using detail::join_scalars;
  std::string out;
  auto line = [&out](const std::string& s) {
    out += s;
    out += '\n';
  };
  line("format_version = " + std::to_string(sc.format_version));
  if (!sc.id.empty()) line("id = " + sc.id);
  line("seed = " + std::to_string(sc.seed));

  if (sc.transformation) {
    line("");
    line("[transformation]");
    line("T = " + join_ints(sc.transformation->system.map));
    line("K = " + std::to_string(sc.transformation->window));
    line("K_list = " + join_ints(sc.transformation->windows));
  } else {
    const auto& g = std::get<FiniteGroupoid>(sc.groupoid);
    line("");
    line("[units]");
    line("count = " + std::to_string(g.n_units()));
    line("unit_arrows = " + join_ints(g.unit_arrows()));
    line("");
    line("[arrows]");
    for (const auto& a : g.arrows())
      line(std::to_string(a.id) + " = " + std::to_string(a.src) + " " + std::to_string(a.rng) + " " +
           std::to_string(g.inverse(a.id)));
    line("");
    line("[compose]");
    for (const auto& e : g.compose_table())
      line(std::to_string(e.left) + " " + std::to_string(e.right) + " = " + std::to_string(e.result));
  }

  line("");
  line("[bundle]");
  line(std::string("field = ") + (sc.bundle.field == Field::real ? "real" : "complex"));
  if (sc.bundle.is_constant() && !sc.bundle.dims.empty()) {
    line("dim = " + std::to_string(sc.bundle.dims.front()));
  } else {
    line("dims = " + join_ints(sc.bundle.dims));
  }

  std::visit(
      [&](const auto& model) {
        line("");
        line("[action]");
        line(std::string("kind = ") + detail::to_string(model.action_spec.kind));
        for (const auto& [a, m] : model.action_spec.mats) {
          std::vector<typename std::decay_t<decltype(m)>::Scalar> flat;
          for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) flat.push_back(m(i, j));
          line(std::to_string(a) + " = " + join_scalars(flat));
        }
        const auto& cs = model.cocycle_spec;
        line("");
        line("[cocycle]");
        line(std::string("kind = ") + detail::to_string(cs.kind));
        if (cs.kind == CocycleKind::perturbed) line(std::string("base = ") + detail::to_string(cs.base));
        for (const auto& [a, v] : cs.values) line("value " + std::to_string(a) + " = " + join_scalars(v));
        if (cs.section)
          for (std::size_t x = 0; x < cs.section->values.size(); ++x)
            line("section " + std::to_string(x) + " = " + join_scalars(cs.section->values[x]));
        if (!cs.potential.empty()) line("potential = " + join_scalars(cs.potential));
        if (cs.kind == CocycleKind::perturbed) {
          line("arrow = " + std::to_string(cs.arrow));
          line("delta = " + format_double(cs.delta));
          line("coord = " + std::to_string(cs.coord));
        }
      },
      sc.model);

  if (sc.metric) {
    line("");
    line("[metric]");
    for (const auto& e : sc.metric->edges)
      line("edge " + std::to_string(e.a) + " " + std::to_string(e.b) + " = " + format_double(e.weight));
  }
  line("");
  line("[tolerances]");
  line("algebra = " + format_double(sc.tolerances.algebra));
  line("solve = " + format_double(sc.tolerances.solve));
  return out;
}

}  // namespace cocycle_lab
