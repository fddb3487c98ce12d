#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "io.hpp"
#include "nearperf/checks.hpp"
#include "nearperf/error.hpp"
#include "nearperf/ladic.hpp"
#include "nearperf/linalg.hpp"
#include "report.hpp"

namespace {

using namespace nearperf;

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kViolation = 2;

constexpr const char* kBitsVariable = "NEARPERF_MAX_BITS";

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::vector<Int> to_primes(const std::vector<long>& raw) {
  std::vector<Int> out;
  for (long p : raw) {
    if (!is_prime(Int(p))) throw PreconditionError(std::to_string(p) + " is not prime");
    out.emplace_back(p);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Loads and validates; prints the issues and returns false on an invalid instance.
bool load_valid(const std::string& path, io::Instance& inst) {
  inst = io::load_instance(path);
  const ValidationReport v = validate(inst.npc);
  if (v.valid()) return true;
  std::cout << "invalid\n" << v.to_string();
  if (!v.to_string().empty() && v.to_string().back() != '\n') std::cout << '\n';
  return false;
}

void apply_bit_cap() {
  const char* raw = std::getenv(kBitsVariable);
  if (raw == nullptr || *raw == '\0') return;
  char* end = nullptr;
  const unsigned long long bits = std::strtoull(raw, &end, 10);
  if (*end != '\0' || bits == 0) throw PreconditionError(std::string(kBitsVariable) + " must be a positive integer");
  set_bit_limit(std::size_t(bits));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Euler characteristics of nearly perfect complexes of abelian groups"};
  app.require_subcommand(1);
  bool timing = false;
  app.add_flag("--timing", timing, "Append elapsed seconds to the output");

  std::string file, lambda_file, out_file;
  std::vector<long> primes = {2, 3, 5, 7};
  std::string suite = "all";
  std::uint64_t seed = 1;
  std::size_t cases = 100;

  auto* validate_cmd = app.add_subcommand("validate", "Check the defining conditions of an instance");
  validate_cmd->add_option("file", file, "Instance file")->required();

  auto* chi_cmd = app.add_subcommand("chi", "Euler characteristic");
  chi_cmd->add_option("file", file, "Instance file")->required();

  auto* chi_l_cmd = app.add_subcommand("chi-l", "l-adic Euler characteristics");
  chi_l_cmd->add_option("file", file, "Instance file")->required();
  chi_l_cmd->add_option("--primes", primes, "Comma-separated primes")->delimiter(',');

  auto* chi_rel_cmd = app.add_subcommand("chi-rel", "Refined Euler characteristic for a trivialization");
  chi_rel_cmd->add_option("file", file, "Instance file")->required();
  chi_rel_cmd->add_option("--lambda", lambda_file, "Trivialization file")->required();

  auto* check_cmd = app.add_subcommand("check", "Randomized property suites");
  check_cmd->add_option("--suite", suite, "linalg, mixed, cone, ladic, relk, torsion or all");
  check_cmd->add_option("--seed", seed, "Seed");
  check_cmd->add_option("--cases", cases, "Cases per property")->check(CLI::PositiveNumber);

  auto* report_cmd = app.add_subcommand("report", "Full report for an instance");
  report_cmd->add_option("file", file, "Instance file")->required();
  report_cmd->add_option("-o,--output", out_file, "Output file (stdout if omitted)");
  report_cmd->add_option("--lambda", lambda_file, "Trivialization file");
  report_cmd->add_option("--primes", primes, "Comma-separated primes")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  const Stopwatch clock;
  auto elapsed = [&]() -> std::optional<double> {
    if (!timing) return std::nullopt;
    return clock.seconds();
  };
  try {
    apply_bit_cap();
    io::Instance inst;
    if (validate_cmd->parsed()) {
      if (!load_valid(file, inst)) return kInvalid;
      std::cout << "valid\n";
    } else if (chi_cmd->parsed()) {
      if (!load_valid(file, inst)) return kInvalid;
      std::cout << chi(inst.npc) << '\n';
    } else if (chi_l_cmd->parsed()) {
      const std::vector<Int> ps = to_primes(primes);
      if (!load_valid(file, inst)) return kInvalid;
      const long c = chi(inst.npc);
      bool agree = true;
      for (const Int& l : ps) {
        const long v = chi_l(inst.npc, l);
        agree = agree && v == c;
        std::cout << l << ": " << v << '\n';
      }
      if (!agree) {
        std::cerr << "chi_l differs from chi = " << c << '\n';
        return kViolation;
      }
    } else if (chi_rel_cmd->parsed()) {
      if (!load_valid(file, inst)) return kInvalid;
      const io::Trivialization t = io::load_trivialization(lambda_file);
      const RelativeEuler e = chi_rel_npc(inst.npc, t.lambda, t.lambda_tilde.value_or(t.lambda));
      std::cout << io::render(e);
      if (!e.routes_agree() || e.forgetful != e.value || e.rank_image != chi(inst.npc)) return kViolation;
    } else if (check_cmd->parsed()) {
      const auto s = parse_suite(suite);
      if (!s) throw PreconditionError("unknown suite '" + suite + "'");
      const auto results = run_checks(*s, seed, cases);
      std::cout << io::render_checks(results, seed, cases, elapsed());
      for (const auto& r : results)
        if (!r.ok()) return kViolation;
    } else if (report_cmd->parsed()) {
      const std::vector<Int> ps = to_primes(primes);
      inst = io::load_instance(file);
      std::optional<io::Trivialization> t;
      if (!lambda_file.empty()) t = io::load_trivialization(lambda_file);
      io::ReportData r = io::compute_report(inst, file, ps, t);
      r.seconds = elapsed();
      const std::string text = io::render(r);
      if (out_file.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(out_file);
        if (!out) throw PreconditionError("cannot write " + out_file);
        out << text;
      }
      if (!r.validation.valid()) return kInvalid;
      if (!io::violated(r).empty()) return kViolation;
    }
  } catch (const io::ParseError& e) {
    std::cerr << e.what() << '\n';
    return kInvalid;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const OutOfClassError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    // Contract violations, bit cap, and anything unexpected.
    std::cerr << "internal error: " << e.what() << '\n';
    return kViolation;
  }
  if (timing && !check_cmd->parsed() && !report_cmd->parsed()) std::cerr << "seconds: " << clock.seconds() << '\n';
  return kOk;
}
