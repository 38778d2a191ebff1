#pragma once

// Command-line front end. run_cli never exits the process; it returns the
// exit code so tests can drive it in-process.
//
// exit codes: 0 success, 1 a verification failed, 2 budget exceeded,
//             3 file or parse error, 4 invalid option combination

#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "utstar/io.hpp"

namespace utstar {

enum ExitCode : int { kExitOk = 0, kExitVerifyFailed = 1, kExitBudget = 2, kExitIo = 3, kExitInvalid = 4 };

struct CliConfig {
  std::string subcommand;
  std::string target = "all";
  int n = 0;
  int m = 0;
  int m_max = 0;
  std::string grading_path;
  bool fine = false;
  std::string involution = "none";
  std::string method = "auto";
  std::string rank_mode = "auto";
  int primes = 2;
  std::uint64_t max_rows = Budget{}.max_rows;
  std::uint64_t max_columns = Budget{}.max_columns;
  std::uint64_t max_tuples = Budget{}.max_tuples;
  unsigned threads = 0;
  std::string format = "text";
  std::string output;
  bool timing = false;
  int digits = 6;
};

namespace detail {

inline std::optional<InvolutionKind> involution_from(const std::string& s) {
  if (s == "none") return std::nullopt;
  if (s == "orthogonal") return InvolutionKind::Orthogonal;
  if (s == "symplectic") return InvolutionKind::Symplectic;
  throw InvalidArgument("unknown involution \"" + s + "\"");
}

inline RankPolicy policy_from(const CliConfig& cfg) {
  RankPolicy p;
  if (cfg.rank_mode == "exact") p.method = RankMethod::Exact;
  else if (cfg.rank_mode == "modp") p.method = RankMethod::Modular;
  else p.method = RankMethod::Auto;
  p.prime_count = cfg.primes;
  return p;
}

inline Budget budget_from(const CliConfig& cfg) { return Budget{cfg.max_rows, cfg.max_columns, cfg.max_tuples}; }

inline CodimMethod method_from(const std::string& s) {
  if (s == "direct") return CodimMethod::Direct;
  if (s == "symmetric-skew") return CodimMethod::SymmetricSkew;
  return CodimMethod::Auto;
}

inline unsigned threads_from(const CliConfig& cfg, bool flag_given) {
  if (flag_given) return cfg.threads;
  if (const char* env = std::getenv("UTSTAR_THREADS")) {
    try {
      auto t = std::stoul(env);
      if (t > 0) return static_cast<unsigned>(t);
    } catch (const std::exception&) {
    }
    throw InvalidArgument(std::string("UTSTAR_THREADS must be a positive integer, got \"") + env + "\"");
  }
  return 1;
}

inline std::optional<ElementaryGrading> grading_from(const CliConfig& cfg) {
  if (cfg.fine && !cfg.grading_path.empty()) throw InvalidArgument("--fine and --grading are mutually exclusive");
  if (cfg.fine) return ElementaryGrading::fine(cfg.n);
  if (cfg.grading_path.empty()) return std::nullopt;
  auto g = load_grading(cfg.grading_path);
  if (g.n() != cfg.n)
    throw InvalidArgument("grading file is for n=" + std::to_string(g.n()) + " but --n is " + std::to_string(cfg.n));
  return g;
}

inline std::string render_json(const Json& j) { return j.dump(2) + "\n"; }

inline std::string yes_no(bool b) { return b ? "yes" : "no"; }

inline std::vector<VerifyResult> run_verify(const CliConfig& cfg, unsigned threads) {
  const auto policy = policy_from(cfg);
  const auto budget = budget_from(cfg);
  const int n = cfg.n;
  const int m = cfg.m;
  auto kind = involution_from(cfg.involution);
  const bool all = cfg.target == "all";
  const bool star_ready = n >= 2 && m >= 2 * (n - 1);
  auto star_kind = [&]() -> InvolutionKind {
    if (kind) return *kind;
    return InvolutionKind::Orthogonal;
  };
  std::vector<VerifyResult> out;
  auto skipped = [&](const std::string& target, const std::string& why) {
    VerifyResult v;
    v.target = target;
    v.pass = true;
    v.evidence = "skipped: " + why;
    out.push_back(v);
  };

  if (all || cfg.target == "drensky") out.push_back(verify_drensky_independence(n, m, policy, budget, threads));
  if (all || cfg.target == "star-family") {
    if (all && !star_ready) skipped("star-family", "needs n >= 2 and m >= 2(n-1)");
    else if (all && !involution_admissible(star_kind(), n)) skipped("star-family", "involution not admissible");
    else out.push_back(verify_star_family(n, m, star_kind(), policy, budget, threads));
  }
  if (all || cfg.target == "witness") {
    if (all && !star_ready) skipped("witness", "needs n >= 2 and m >= 2(n-1)");
    else if (all && !involution_admissible(star_kind(), n)) skipped("witness", "involution not admissible");
    else {
      auto w = witness_matrix(n, m, star_kind(), policy, threads);
      VerifyResult v;
      v.target = "witness";
      v.pass = w.pass;
      v.expected = w.size;
      v.observed = w.rank;
      v.mode = w.mode;
      v.rows = w.size;
      v.cols = w.size;
      std::string diag;
      if (w.size <= 4) {
        diag = "; diagonal";
        for (std::size_t r = 0; r < w.size; ++r) {
          std::int64_t d = 0;
          for (const auto& [c, val] : w.matrix.row_data()[r])
            if (c == r) d = val;
          diag += " " + std::to_string(d);
        }
        diag += " at e_1" + std::to_string(n);
      }
      v.evidence = std::to_string(w.size) + "x" + std::to_string(w.size) + " matrix, rank " + std::to_string(w.rank) +
                   ", diagonal nonzero " + yes_no(w.diagonal_nonzero) + ", triangular " + yes_no(w.triangular) +
                   ", off-diagonal nonzeros " + std::to_string(w.off_diagonal_nonzeros) + diag;
      out.push_back(v);
    }
  }
  if (all || cfg.target == "lower-bound") {
    if (all && !star_ready) skipped("lower-bound", "needs n >= 2 and m >= 2(n-1)");
    else if (all && !involution_admissible(star_kind(), n)) skipped("lower-bound", "involution not admissible");
    else {
      auto b = lower_bound_check(n, m, star_kind(), policy, budget, threads);
      VerifyResult v;
      v.target = "lower-bound";
      v.pass = b.pass;
      v.expected = b.bound;
      v.observed = b.codimension;
      v.mode = b.mode;
      v.evidence = "c_m(UT_n,*) = " + std::to_string(b.codimension) + (b.pass ? " >= " : " < ") + std::to_string(b.bound);
      out.push_back(v);
    }
  }
  if (all || cfg.target == "recurrence") {
    if (all && n < 2) skipped("recurrence", "needs n >= 2");
    else {
      auto r = recurrence_check(n, m, policy, budget, threads);
      VerifyResult v;
      v.target = "recurrence";
      v.pass = r.pass;
      v.expected = r.qm + r.previous;
      v.observed = r.codimension;
      v.mode = r.mode;
      v.evidence = std::to_string(r.codimension) + (r.pass ? " = " : " != ") + std::to_string(r.qm) + " + " +
                   std::to_string(r.previous);
      out.push_back(v);
    }
  }
  if (all || cfg.target == "sandwich") {
    if (all && !involution_admissible(star_kind(), n)) skipped("sandwich", "involution not admissible");
    else {
      auto g = grading_from(cfg).value_or(ElementaryGrading::trivial(n));
      auto s = sandwich_check(n, m, g, star_kind(), policy, budget, threads);
      VerifyResult v;
      v.target = "sandwich";
      v.pass = s.pass;
      v.expected = s.fine;
      v.observed = s.graded;
      v.mode = s.mode;
      v.evidence = std::to_string(s.star) + " <= " + std::to_string(s.graded) + " <= " + std::to_string(s.fine) +
                   (s.pass ? "" : " fails");
      out.push_back(v);
    }
  }
  return out;
}

inline std::string run_grading(const CliConfig& cfg) {
  auto g = grading_from(cfg).value_or(ElementaryGrading::trivial(cfg.n));
  auto kind = involution_from(cfg.involution);
  std::optional<HomogeneityResult> cert;
  if (kind) cert = homogeneous_involution_map(g, *kind);
  auto label = [](MatrixUnit u) { return "e" + std::to_string(u.i) + "," + std::to_string(u.j); };
  std::vector<std::vector<std::string>> rows{{"degree", "dim", "units"}};
  for (const auto& d : g.support()) {
    auto comp = g.homogeneous_component(d);
    std::string units;
    for (const auto& u : comp) units += (units.empty() ? "" : " ") + label(u);
    std::vector<std::string> row{g.group().format(d), std::to_string(comp.size()), units};
    rows.push_back(std::move(row));
  }
  if (cert) {
    rows[0].push_back("psi");
    if (auto* c = std::get_if<HomInvolutionCert>(&*cert))
      for (std::size_t k = 1; k < rows.size(); ++k)
        rows[k].push_back(g.group().format(c->psi.at(g.support()[k - 1])));
  }
  std::string certificate = "none requested";
  bool homogeneous = true;
  if (cert) {
    if (auto* bad = std::get_if<NotHomogeneousReport>(&*cert)) {
      homogeneous = false;
      certificate = std::string("conflict: ") + bad->reason;
    } else {
      certificate = std::string(to_string(*kind)) + " involution is homogeneous";
    }
  }
  if (cfg.format == "json") {
    Json j;
    j["grading"] = grading_to_json(g);
    Json comps = Json::array();
    for (const auto& d : g.support()) {
      Json units = Json::array();
      for (const auto& u : g.homogeneous_component(d)) units.push_back({u.i, u.j});
      comps.push_back({{"degree", g.group().format(d)}, {"units", units}});
    }
    j["components"] = comps;
    j["involution"] = cfg.involution;
    if (cert) {
      j["homogeneous"] = homogeneous;
      if (auto* c = std::get_if<HomInvolutionCert>(&*cert)) {
        Json psi = Json::array();
        for (const auto& [a, b] : c->psi.entries()) psi.push_back({g.group().format(a), g.group().format(b)});
        j["psi"] = psi;
      } else {
        const auto& bad = std::get<NotHomogeneousReport>(*cert);
        j["conflict"] = {{"first", {bad.first.i, bad.first.j}},
                         {"second", {bad.second.i, bad.second.j}},
                         {"reason", bad.reason}};
      }
    }
    return render_json(j);
  }
  if (cfg.format == "csv") return csv(rows);
  return "group " + describe_grading(g) + "  n " + std::to_string(g.n()) + "\n" + aligned(rows) +
         "certificate: " + certificate + "\n";
}

}  // namespace detail

/// Parses `args` (without the program name) and runs one subcommand.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliConfig cfg;
  CLI::App app{"Exact star-codimensions of upper-triangular matrix algebras", "utstar"};
  app.require_subcommand(1);
  bool threads_given = false;

  auto common = [&](CLI::App* sub, bool needs_m) {
    sub->add_option("--n", cfg.n, "matrix size")->required()->check(CLI::Range(1, 64));
    if (needs_m) sub->add_option("--m", cfg.m, "degree")->required()->check(CLI::Range(0, 30));
    sub->add_option("--grading", cfg.grading_path, "grading JSON file");
    sub->add_flag("--fine", cfg.fine, "use the fine grading by the free group");
    sub->add_option("--involution", cfg.involution, "none | orthogonal | symplectic")
        ->check(CLI::IsMember({"none", "orthogonal", "symplectic"}));
    sub->add_option("--rank-mode", cfg.rank_mode, "exact | modp | auto")->check(CLI::IsMember({"exact", "modp", "auto"}));
    sub->add_option("--primes", cfg.primes, "primes for modular ranks")->check(CLI::PositiveNumber);
    sub->add_option("--max-rows", cfg.max_rows, "rows per evaluation matrix")->check(CLI::PositiveNumber);
    sub->add_option("--max-columns", cfg.max_columns, "columns per evaluation matrix")->check(CLI::PositiveNumber);
    sub->add_option("--max-tuples", cfg.max_tuples, "substitution tuples per evaluation matrix")
        ->check(CLI::PositiveNumber);
    sub->add_option_function<unsigned>(
           "--threads",
           [&](const unsigned& t) {
             cfg.threads = t;
             threads_given = true;
           },
           "worker threads (default: UTSTAR_THREADS or 1)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--format", cfg.format, "text | json | csv")->check(CLI::IsMember({"text", "json", "csv"}));
    sub->add_option("--output", cfg.output, "write to this file instead of stdout");
  };

  auto* codim_cmd = app.add_subcommand("codim", "compute one codimension");
  common(codim_cmd, true);
  codim_cmd->add_option("--method", cfg.method, "auto | direct | symmetric-skew")
      ->check(CLI::IsMember({"auto", "direct", "symmetric-skew"}));
  codim_cmd->add_flag("--timing", cfg.timing, "include elapsed time (output is then not reproducible)");

  auto* verify_cmd = app.add_subcommand("verify", "check the independence lemmas and inequalities");
  common(verify_cmd, true);
  verify_cmd->add_option("target", cfg.target, "drensky | star-family | witness | lower-bound | recurrence | sandwich | all")
      ->check(CLI::IsMember({"drensky", "star-family", "witness", "lower-bound", "recurrence", "sandwich", "all"}));

  auto* asym_cmd = app.add_subcommand("asymptotics", "codimensions next to the asymptotic target");
  common(asym_cmd, false);
  asym_cmd->add_option("--m-max", cfg.m_max, "largest degree")->required()->check(CLI::Range(1, 64));
  asym_cmd->add_option("--digits", cfg.digits, "decimal places of the ratio")->check(CLI::Range(0, 40));

  auto* grading_cmd = app.add_subcommand("grading", "inspect a grading and its homogeneous involutions");
  common(grading_cmd, false);

  std::vector<std::string> argv_store{"utstar"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }

  try {
    const unsigned threads = detail::threads_from(cfg, threads_given);
    std::string text;
    int code = kExitOk;
    if (codim_cmd->parsed()) {
      CodimRequest req;
      req.n = cfg.n;
      req.m = cfg.m;
      req.grading = detail::grading_from(cfg);
      req.involution = detail::involution_from(cfg.involution);
      req.policy = detail::policy_from(cfg);
      req.budget = detail::budget_from(cfg);
      req.threads = threads;
      req.method = detail::method_from(cfg.method);
      auto rep = codim(req);
      if (cfg.format == "json") text = detail::render_json(report_to_json(rep, cfg.timing));
      else if (cfg.format == "csv") text = report_to_csv(rep);
      else text = report_to_text(rep, cfg.timing);
    } else if (verify_cmd->parsed()) {
      auto results = detail::run_verify(cfg, threads);
      bool pass = true;
      for (const auto& v : results) pass = pass && v.pass;
      if (cfg.format == "json") {
        Json list = Json::array();
        for (const auto& v : results) list.push_back(verify_to_json(v));
        text = detail::render_json({{"n", cfg.n}, {"m", cfg.m}, {"pass", pass}, {"results", list}});
      } else if (cfg.format == "csv") {
        text = csv(verify_rows(results));
      } else {
        text = aligned(verify_rows(results));
      }
      if (!pass) code = kExitVerifyFailed;
    } else if (asym_cmd->parsed()) {
      auto table = asymptotic_report(cfg.n, cfg.m_max, detail::grading_from(cfg), detail::involution_from(cfg.involution),
                                     detail::policy_from(cfg), detail::budget_from(cfg), threads, cfg.digits);
      if (cfg.format == "json") text = detail::render_json(table_to_json(table));
      else if (cfg.format == "csv") text = table_to_csv(table);
      else text = table_to_text(table);
    } else if (grading_cmd->parsed()) {
      text = detail::run_grading(cfg);
    }
    if (cfg.output.empty()) {
      out << text;
    } else {
      std::ofstream f(cfg.output, std::ios::binary);
      if (!(f << text)) throw IoError("cannot write " + cfg.output);
    }
    return code;
  } catch (const BudgetExceeded& e) {
    err << "budget exceeded: " << e.what() << "\n";
    return kExitBudget;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitIo;
  } catch (const InvalidArgument& e) {
    err << "invalid: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
}

}  // namespace utstar
