#include "report.hpp"

#include <yaml-cpp/yaml.h>

#include "nearperf/ladic.hpp"

namespace nearperf::io {

namespace {

void emit_rational(YAML::Emitter& out, const Rat& q) {
  out << YAML::BeginMap << YAML::Key << "num" << YAML::Value << q.get_num().get_str() << YAML::Key << "den"
      << YAML::Value << q.get_den().get_str() << YAML::EndMap;
}

void emit_valuations(YAML::Emitter& out, const LocalValuationVector& v) {
  out << YAML::BeginMap;
  for (const auto& [l, e] : v) out << YAML::Key << l.get_str() << YAML::Value << e;
  out << YAML::EndMap;
}

void emit_relative(YAML::Emitter& out, const RelativeEuler& e) {
  out << YAML::BeginMap;
  out << YAML::Key << "value" << YAML::Value;
  emit_rational(out, e.value);
  out << YAML::Key << "valuations" << YAML::Value;
  emit_valuations(out, local_components(e.value));
  out << YAML::Key << "rational_route" << YAML::Value;
  emit_rational(out, e.rational_route);
  out << YAML::Key << "per_prime_route" << YAML::Value;
  emit_valuations(out, e.per_prime);
  out << YAML::Key << "correction" << YAML::Value;
  emit_rational(out, e.correction);
  out << YAML::Key << "forgetful" << YAML::Value;
  emit_rational(out, e.forgetful);
  out << YAML::Key << "rank_image" << YAML::Value << e.rank_image;
  out << YAML::Key << "routes_agree" << YAML::Value << e.routes_agree();
  out << YAML::Key << "forgetful_agrees" << YAML::Value << (e.forgetful == e.value);
  out << YAML::EndMap;
}

std::string text(const YAML::Emitter& out) { return std::string(out.c_str()) + "\n"; }

}  // namespace

std::vector<std::string> violated(const ReportData& r) {
  std::vector<std::string> v;
  if (r.chi)
    for (const auto& [l, c] : r.chi_l)
      if (c != *r.chi) v.push_back("chi_l at " + l.get_str() + " differs from chi");
  if (r.chi_rel) {
    if (!r.chi_rel->routes_agree()) v.push_back("per-prime and rational routes differ");
    if (r.chi_rel->forgetful != r.chi_rel->value) v.push_back("forgetful class differs");
    if (r.chi && r.chi_rel->rank_image != *r.chi) v.push_back("rank image differs from chi");
  }
  return v;
}

ReportData compute_report(const Instance& inst, const std::string& source, const std::vector<Int>& primes,
                          const std::optional<Trivialization>& lambda) {
  ReportData r;
  r.source = source;
  r.validation = validate(inst.npc);
  if (!r.validation.valid()) return r;
  r.chi = chi(inst.npc);
  for (const Int& l : primes) r.chi_l[l] = chi_l(inst.npc, l);
  if (inst.action) {
    const BoundedComplex& c = inst.npc.complex;
    for (int i = c.lo(); i <= c.hi(); ++i) {
      const MixedModule& m = c.term(i);
      auto it = inst.action->generators.find(i);
      const RatMatrix g = it == inst.action->generators.end() ? RatMatrix::identity(m.dim()) : it->second;
      const CyclicModule cm{m, ModuleHom(m, m, g), inst.action->order};
      require(is_valid_action(cm), "action in degree " + std::to_string(i) + " is not of order dividing " +
                                       std::to_string(inst.action->order));
      r.action_trivial[i] = is_cohomologically_trivial(cm);
    }
  }
  if (lambda) r.chi_rel = chi_rel_npc(inst.npc, lambda->lambda, lambda->lambda_tilde.value_or(lambda->lambda));
  return r;
}

std::string render(const ReportData& r) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "instance" << YAML::Value << r.source;
  out << YAML::Key << "validation" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "valid" << YAML::Value << r.validation.valid();
  out << YAML::Key << "issues" << YAML::Value << YAML::BeginSeq;
  for (const auto& is : r.validation.issues)
    out << YAML::BeginMap << YAML::Key << "degree" << YAML::Value << is.degree << YAML::Key << "invariant"
        << YAML::Value << is.invariant << YAML::Key << "detail" << YAML::Value << is.detail << YAML::EndMap;
  out << YAML::EndSeq << YAML::EndMap;
  if (r.chi) out << YAML::Key << "chi" << YAML::Value << *r.chi;
  if (!r.chi_l.empty()) {
    out << YAML::Key << "chi_l" << YAML::Value << YAML::BeginMap;
    for (const auto& [l, c] : r.chi_l) out << YAML::Key << l.get_str() << YAML::Value << c;
    out << YAML::EndMap;
  }
  if (!r.action_trivial.empty()) {
    out << YAML::Key << "cohomologically_trivial" << YAML::Value << YAML::BeginMap;
    for (const auto& [i, t] : r.action_trivial) out << YAML::Key << i << YAML::Value << t;
    out << YAML::EndMap;
  }
  if (r.chi_rel) {
    out << YAML::Key << "chi_rel" << YAML::Value;
    emit_relative(out, *r.chi_rel);
  }
  const auto bad = violated(r);
  out << YAML::Key << "checks_hold" << YAML::Value << bad.empty();
  if (!bad.empty()) out << YAML::Key << "violations" << YAML::Value << bad;
  if (r.seconds) out << YAML::Key << "seconds" << YAML::Value << *r.seconds;
  out << YAML::EndMap;
  return text(out);
}

std::string render(const RelativeEuler& e) {
  YAML::Emitter out;
  out << YAML::BeginMap << YAML::Key << "chi_rel" << YAML::Value;
  emit_relative(out, e);
  out << YAML::EndMap;
  return text(out);
}

std::string render_checks(const std::vector<SuiteResult>& results, std::uint64_t seed, std::size_t cases,
                          std::optional<double> seconds) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "seed" << YAML::Value << seed;
  out << YAML::Key << "cases" << YAML::Value << cases;
  out << YAML::Key << "suites" << YAML::Value << YAML::BeginMap;
  for (const auto& s : results) {
    out << YAML::Key << s.suite << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "passed" << YAML::Value << std::to_string(s.passed) + "/" + std::to_string(s.cases);
    out << YAML::Key << "properties" << YAML::Value << YAML::BeginMap;
    for (const auto& p : s.properties)
      out << YAML::Key << p.name << YAML::Value << std::to_string(p.passed) + "/" + std::to_string(p.cases);
    out << YAML::EndMap;
    bool any = false;
    for (const auto& p : s.properties) any = any || !p.failures.empty();
    if (any) {
      out << YAML::Key << "failures" << YAML::Value << YAML::BeginSeq;
      for (const auto& p : s.properties)
        for (const auto& [k, msg] : p.failures)
          out << YAML::BeginMap << YAML::Key << "property" << YAML::Value << p.name << YAML::Key << "case"
              << YAML::Value << k << YAML::Key << "message" << YAML::Value << msg << YAML::EndMap;
      out << YAML::EndSeq;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  if (seconds) out << YAML::Key << "seconds" << YAML::Value << *seconds;
  out << YAML::EndMap;
  return text(out);
}

}  // namespace nearperf::io
