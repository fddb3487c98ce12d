#include "io.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <regex>
#include <sstream>

#include "nearperf/error.hpp"

namespace nearperf::io {

namespace {

std::string position(const std::string& file, int line, int column) {
  if (line <= 0) return file;
  return file + ":" + std::to_string(line) + ":" + std::to_string(column);
}

class Reader {
 public:
  explicit Reader(std::string file) : file_(std::move(file)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
    const YAML::Mark m = at.Mark();
    if (m.is_null()) throw ParseError(file_, 0, 0, msg);
    throw ParseError(file_, m.line + 1, m.column + 1, msg);
  }

  YAML::Node required(const YAML::Node& map, const std::string& key) const {
    const YAML::Node n = map[key];
    if (!n) fail(map, "missing key '" + key + "'");
    return n;
  }

  void only_keys(const YAML::Node& map, std::initializer_list<const char*> keys) const {
    if (!map.IsMap()) fail(map, "expected a mapping");
    for (const auto& kv : map) {
      const std::string k = kv.first.as<std::string>();
      bool known = false;
      for (const char* key : keys) known = known || k == key;
      if (!known) fail(kv.first, "unknown key '" + k + "'");
    }
  }

  long integer(const YAML::Node& n, long lo = std::numeric_limits<long>::min()) const {
    if (!n.IsScalar()) fail(n, "expected an integer");
    long v = 0;
    try {
      std::size_t used = 0;
      const std::string s = n.Scalar();
      v = std::stol(s, &used);
      if (used != s.size()) fail(n, "expected an integer, got '" + s + "'");
    } catch (const std::logic_error&) {
      fail(n, "expected an integer, got '" + n.Scalar() + "'");
    }
    if (v < lo) fail(n, "value must be at least " + std::to_string(lo));
    return v;
  }

  Int big_integer(const YAML::Node& n) const {
    if (!n.IsScalar()) fail(n, "expected an integer");
    try {
      return Int(n.Scalar());
    } catch (const std::invalid_argument&) {
      fail(n, "expected an integer, got '" + n.Scalar() + "'");
    }
  }

  Rat rational(const YAML::Node& n) const {
    if (!n.IsScalar()) fail(n, "expected a rational");
    try {
      return parse_rational(n.Scalar());
    } catch (const ParseError& e) {
      fail(n, e.what());
    }
  }

  /// Rows of rationals; `rows` and `cols` fix the shape when known.
  RatMatrix matrix(const YAML::Node& n, std::optional<std::size_t> rows, std::optional<std::size_t> cols) const {
    if (!n.IsSequence()) fail(n, "expected a matrix as a list of rows");
    const std::size_t r = n.size();
    if (r == 0) {
      if (rows && *rows != 0 && cols && *cols != 0)
        fail(n, "expected a " + std::to_string(*rows) + "x" + std::to_string(*cols) + " matrix, got []");
      return RatMatrix(rows.value_or(0), cols.value_or(0));
    }
    if (rows && *rows != r) fail(n, "expected " + std::to_string(*rows) + " rows, got " + std::to_string(r));
    std::optional<std::size_t> width = cols;
    RatMatrix m;
    for (std::size_t i = 0; i < r; ++i) {
      const YAML::Node row = n[i];
      if (!row.IsSequence()) fail(row, "expected a row as a list");
      if (!width) width = row.size();
      if (row.size() != *width)
        fail(row, "expected " + std::to_string(*width) + " entries, got " + std::to_string(row.size()));
      if (i == 0) m = RatMatrix(r, *width);
      for (std::size_t j = 0; j < *width; ++j) m(i, j) = rational(row[j]);
    }
    return m;
  }

  MixedModule module(const YAML::Node& n) const {
    only_keys(n, {"free_rank", "torsion", "q_rank", "qz_rank"});
    auto count = [&](const char* key) -> std::size_t { return n[key] ? std::size_t(integer(n[key], 0)) : 0; };
    IntVector orders;
    if (const YAML::Node t = n["torsion"]) {
      if (!t.IsSequence()) fail(t, "expected a list of orders");
      for (const auto& o : t) {
        const Int v = big_integer(o);
        if (v < 2) fail(o, "torsion orders must be at least 2");
        orders.push_back(v);
      }
    }
    const MixedModule finite = MixedModule::finite(orders);
    return MixedModule(count("free_rank"), finite.torsion(), count("q_rank"), count("qz_rank"));
  }

  template <typename F>
  void degree_map(const YAML::Node& n, F&& each) const {
    if (!n.IsMap()) fail(n, "expected a mapping from degrees");
    for (const auto& kv : n) each(int(integer(kv.first)), kv.second, kv.first);
  }

 private:
  std::string file_;
};

YAML::Node load_yaml(const std::string& text, const std::string& file) {
  try {
    return YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ParseError(file, e.mark.line + 1, e.mark.column + 1, e.msg);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ParseError::ParseError(std::string file, int line, int column, const std::string& message)
    : std::runtime_error(file.empty() ? message : position(file, line, column) + ": " + message),
      line_(line),
      column_(column) {}

Rat parse_rational(const std::string& s) {
  static const std::regex form(R"(\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*)");
  std::smatch m;
  if (!std::regex_match(s, m, form)) throw ParseError("", 0, 0, "expected a rational, got '" + s + "'");
  const Int den = m[2].matched ? Int(m[2].str()) : Int(1);
  if (den == 0) throw ParseError("", 0, 0, "zero denominator in '" + s + "'");
  Rat q(Int(m[1].str()), den);
  q.canonicalize();
  return q;
}

std::string format_rational(Rat q) {
  q.canonicalize();
  return q.get_den() == 1 ? q.get_num().get_str() : q.get_num().get_str() + "/" + q.get_den().get_str();
}

Instance parse_instance(const std::string& text, const std::string& file) {
  const Reader rd(file);
  const YAML::Node root = load_yaml(text, file);
  if (!root || root.IsNull()) throw ParseError(file, 1, 1, "empty document");
  rd.only_keys(root, {"modules", "complex", "lattices", "tau", "action"});

  std::map<std::string, MixedModule> named;
  if (const YAML::Node mods = root["modules"]) {
    if (!mods.IsMap()) rd.fail(mods, "expected a mapping from names to modules");
    for (const auto& kv : mods) named[kv.first.as<std::string>()] = rd.module(kv.second);
  }

  const YAML::Node cx = rd.required(root, "complex");
  rd.only_keys(cx, {"min_degree", "terms", "differentials"});
  const int lo = cx["min_degree"] ? int(rd.integer(cx["min_degree"])) : 0;
  const YAML::Node terms_node = rd.required(cx, "terms");
  if (!terms_node.IsSequence()) rd.fail(terms_node, "expected a list of terms");
  std::vector<MixedModule> terms;
  for (const auto& t : terms_node) {
    if (t.IsScalar()) {
      auto it = named.find(t.Scalar());
      if (it == named.end()) rd.fail(t, "unknown module '" + t.Scalar() + "'");
      terms.push_back(it->second);
    } else {
      terms.push_back(rd.module(t));
    }
  }
  std::vector<ModuleHom> diffs;
  const YAML::Node dn = cx["differentials"];
  const std::size_t expected = terms.empty() ? 0 : terms.size() - 1;
  if (dn && !dn.IsSequence()) rd.fail(dn, "expected a list of differentials");
  const std::size_t given = dn ? dn.size() : 0;
  if (given != expected)
    rd.fail(dn ? dn : cx, "expected " + std::to_string(expected) + " differentials, got " + std::to_string(given));
  for (std::size_t k = 0; k < expected; ++k) {
    const RatMatrix m = rd.matrix(dn[k], terms[k + 1].dim(), terms[k].dim());
    try {
      diffs.emplace_back(terms[k], terms[k + 1], m);
    } catch (const Error& e) {
      rd.fail(dn[k], "d^" + std::to_string(lo + int(k)) + ": " + e.what());
    }
  }

  Instance out;
  try {
    out.npc.complex = BoundedComplex(lo, terms, diffs);
  } catch (const Error& e) {
    rd.fail(cx, e.what());
  }
  if (const YAML::Node l = root["lattices"])
    rd.degree_map(l, [&](int i, const YAML::Node& v, const YAML::Node&) {
      out.npc.ranks[i] = std::size_t(rd.integer(v, 0));
    });
  if (const YAML::Node t = root["tau"])
    rd.degree_map(t, [&](int i, const YAML::Node& v, const YAML::Node& key) {
      if (!out.npc.ranks.count(i)) rd.fail(key, "tau in degree " + std::to_string(i) + " without a lattice");
      out.npc.tau[i] = rd.matrix(v, out.npc.complex.term(i).dim(), out.npc.ranks[i]);
    });
  for (const auto& [i, r] : out.npc.ranks)
    if (r > 0 && !out.npc.tau.count(i))
      rd.fail(root["lattices"], "lattice in degree " + std::to_string(i) + " has no tau");
  if (const YAML::Node a = root["action"]) {
    rd.only_keys(a, {"order", "generators"});
    Action act;
    act.order = std::size_t(rd.integer(rd.required(a, "order"), 1));
    if (const YAML::Node g = a["generators"])
      rd.degree_map(g, [&](int i, const YAML::Node& v, const YAML::Node&) {
        const std::size_t d = out.npc.complex.term(i).dim();
        act.generators[i] = rd.matrix(v, d, d);
      });
    out.action = act;
  }
  return out;
}

Instance load_instance(const std::string& path) { return parse_instance(read_file(path), path); }

Trivialization parse_trivialization(const std::string& text, const std::string& file) {
  const Reader rd(file);
  const YAML::Node root = load_yaml(text, file);
  if (!root || root.IsNull()) throw ParseError(file, 1, 1, "empty document");
  rd.only_keys(root, {"lambda", "lambda_tilde"});
  Trivialization t;
  t.lambda = rd.matrix(rd.required(root, "lambda"), std::nullopt, std::nullopt);
  if (const YAML::Node lt = root["lambda_tilde"]) t.lambda_tilde = rd.matrix(lt, std::nullopt, std::nullopt);
  return t;
}

Trivialization load_trivialization(const std::string& path) { return parse_trivialization(read_file(path), path); }

}  // namespace nearperf::io
