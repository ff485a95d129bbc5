// Copyright 2026 The PairRank Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// pairrank: command-line front end. Data goes to stdout or --out, all
// diagnostics to stderr. Exit status is 0 on success, 1 on a failed
// operation and 2 on bad usage.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pairrank/adaptive.h"
#include "pairrank/analysis.h"
#include "pairrank/error.h"
#include "pairrank/estimate_joint.h"
#include "pairrank/estimate_single.h"
#include "pairrank/harness.h"
#include "pairrank/io.h"
#include "pairrank/model.h"

namespace {

using namespace pairrank;  // NOLINT

struct Global {
  std::uint64_t seed = 0;
  std::string model = "logistic";
  double sigma = kDefaultSigma;
  bool quiet = false;
  int threads = 1;

  Distribution Dist() const {
    Distribution d{ParseFamily(model), sigma};
    d.Validate();
    return d;
  }
};

Global g;

std::ostream& Log() {
  static std::ostringstream sink;
  if (g.quiet) {
    sink.str("");
    return sink;
  }
  return std::cerr;
}

void Warn(const std::string& message) { std::cerr << "warning: " << message << "\n"; }

// Writes to `path`, or to stdout when it is empty.
void Emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content << std::flush;
  } else {
    WriteFileAtomic(path, content);
  }
}

LexiconProvenance Provenance(std::size_t records) {
  LexiconProvenance p;
  p.record_count = records;
  p.seeds = {g.seed};
  return p;
}

// --- fit --------------------------------------------------------------------

struct FitArgs {
  std::string input, method = "lsq", direct, out;
};

int RunFit(const FitArgs& a) {
  const auto table = ReadComparisonsFile(a.input);
  const Distribution dist = g.Dist();
  const FitMethod method = ParseFitMethod(a.method);
  ModelFit fit;
  std::optional<double> start_ll;
  if (method == FitMethod::kLsq) {
    fit = LsqFit(table.records, dist);
  } else {
    MleOptions options;
    options.warm_start = method == FitMethod::kLsqThenMle;
    if (options.warm_start) start_ll = FitLogLikelihood(table.records, LsqFit(table.records, dist));
    fit = MleFit(table.records, dist, options);
  }
  if (!fit.connected) Warn("comparison graph is disconnected; components were fitted separately");
  if (!fit.draw_width_defined) Warn("draw width undefined (no draws informative); set to 0");
  if (!fit.converged) Warn("optimizer did not reach its convergence tolerance");
  if (!a.direct.empty()) {
    const auto grades = ParseDirectGrades(ReadFileText(a.direct));
    const auto averages = AverageDirectGrades(grades);
    const OriginCalibration cal = CalibrateOrigin(fit.RatingMap(), averages);
    fit = ApplyOrigin(fit, cal.shift);
    Log() << "origin_shift=" << FormatFixed(cal.shift) << " squared_error=" << FormatFixed(cal.squared_error)
          << "\n";
  } else {
    Log() << "origin uncalibrated (no --direct); origin_shift=0\n";
  }
  const std::string lexicon = FormatLexicon(LexiconFromFit(fit, nullptr, Provenance(table.records.size())));
  Emit(a.out, lexicon);
  std::ostringstream summary;
  summary << "method=" << FitMethodName(fit.method) << " t=" << FormatFixed(fit.draw_width.value());
  if (method == FitMethod::kLsq) {
    summary << " objective=" << FormatFixed(fit.objective_value, 9)
            << " loglik=" << FormatFixed(FitLogLikelihood(table.records, fit), 6);
  } else {
    summary << " loglik=" << FormatFixed(fit.objective_value, 6);
    if (start_ll) summary << " loglik_start=" << FormatFixed(*start_ll, 6);
  }
  summary << " items=" << fit.items.size() << " iterations=" << fit.iterations << "\n";
  // With the lexicon on stdout the summary is a diagnostic.
  if (a.out.empty() || a.out == "-") Log() << summary.str(); else if (!g.quiet) std::cout << summary.str();
  return 0;
}

// --- gof --------------------------------------------------------------------

struct GofArgs {
  std::string input, lexicon, groups_out;
  int groups = 600;
};

int RunGof(const GofArgs& a) {
  const auto table = ReadComparisonsFile(a.input);
  const Lexicon lexicon = ReadLexiconFile(a.lexicon);
  const ModelFit fit = lexicon.ToFit();
  const GofReport report = GofChiSquare(table.records, fit, a.groups);
  if (report.groups_reduced) {
    Warn("requested " + std::to_string(a.groups) + " groups, data supports " +
         std::to_string(report.group_count()) + "; G was reduced");
  }
  if (report.impossible_outcome) Warn("an observed outcome has zero model probability: chi2=inf");
  if (report.small_expected_cells > 0) {
    Log() << "note: " << report.small_expected_cells << " cells have expected count below 1\n";
  }
  std::cout << FormatGofRow(report, fit.distribution, fit.method);
  if (!a.groups_out.empty()) WriteFileAtomic(a.groups_out, FormatGofGroups(report));
  return 0;
}

// --- bootstrap ----------------------------------------------------------------

struct BootstrapArgs {
  std::string input, direct, out;
  int reps = 200;
};

int RunBootstrap(const BootstrapArgs& a) {
  const auto table = ReadComparisonsFile(a.input);
  const Distribution dist = g.Dist();
  ModelFit fit;
  std::map<std::string, double> sd;
  if (a.reps < 2) {
    Warn("B=" + std::to_string(a.reps) + " cannot estimate a standard deviation; bootstrap_sd omitted");
    fit = LsqFit(table.records, dist);
  } else {
    BootstrapOptions options;
    options.replications = a.reps;
    options.seed = g.seed;
    options.threads = g.threads;
    const BootstrapResult result = BootstrapSd(table.records, dist, options);
    if (result.flagged) Warn("some replicates stayed disconnected after retries and were dropped");
    if (result.retries > 0) Log() << "redrew " << result.retries << " disconnected resamples\n";
    fit = result.point;
    sd = result.sd;
    Log() << "replications=" << result.replications << " median_sd=" << FormatFixed(MedianBootstrapSd(result))
          << "\n";
  }
  if (!a.direct.empty()) {
    const auto averages = AverageDirectGrades(ParseDirectGrades(ReadFileText(a.direct)));
    fit = ApplyOrigin(fit, CalibrateOrigin(fit.RatingMap(), averages).shift);
  }
  Emit(a.out, FormatLexicon(LexiconFromFit(fit, sd.empty() ? nullptr : &sd, Provenance(table.records.size()))));
  return 0;
}

// --- add-word -------------------------------------------------------------------

struct AddWordArgs {
  std::string lexicon, word, answers, out, estimator = "moments";
  int m = kDefaultComparisons;
  int folds = 1;
  int jitter = 0;
  bool interactive = false;
};

// Accepts first|draw|second (pair order: new word, anchor) and the shortcuts
// + = - from the terminal prompt.
std::optional<PairOutcome> ParseAnswer(std::string token) {
  while (!token.empty() && std::isspace(static_cast<unsigned char>(token.back()))) token.pop_back();
  while (!token.empty() && std::isspace(static_cast<unsigned char>(token.front()))) token.erase(0, 1);
  if (token == "+") return PairOutcome::kFirstWins;
  if (token == "=") return PairOutcome::kDraw;
  if (token == "-") return PairOutcome::kSecondWins;
  try {
    return ParseOutcomeToken(token);
  } catch (const Error&) {
    return std::nullopt;
  }
}

int RunAddWord(const AddWordArgs& a) {
  Lexicon lexicon = ReadLexiconFile(a.lexicon);
  if (lexicon.Find(a.word)) throw Error(ErrorCode::kDuplicateWord, "'" + a.word + "' is already in the lexicon");
  InsertionOptions options;
  options.comparisons = a.m;
  options.folds = a.folds;
  options.pivot_jitter = a.jitter;
  options.seed = g.seed;
  const int minimum = SearchDepth(lexicon.entries.size());
  if (a.m < minimum) {
    throw Error(ErrorCode::kInsufficientAnchors, "m must be at least ceil(log2 n) = " + std::to_string(minimum));
  }
  InsertionSession session(a.word, lexicon.Anchors(), options);

  std::vector<std::string> answers;
  if (!a.interactive) {
    std::istringstream in(ReadFileText(a.answers));
    for (std::string line; std::getline(in, line);) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      answers.push_back(line);
    }
  }
  std::size_t next_answer = 0;
  while (session.phase() != Phase::kDone) {
    const std::size_t q = session.NextQuery();
    const std::string& anchor = session.anchors()[q].item;
    std::optional<PairOutcome> outcome;
    if (a.interactive) {
      while (!outcome) {
        std::cerr << "[" << session.comparisons_used() + 1 << "/" << session.budget() << "] '" << a.word
                  << "' vs '" << anchor << "': first (+) more positive, draw (=), second (-) more positive? ";
        std::string line;
        if (!std::getline(std::cin, line)) throw Error(ErrorCode::kIo, "input ended before the session finished");
        outcome = ParseAnswer(line);
        if (!outcome) std::cerr << "please answer first, draw or second\n";
      }
    } else {
      if (next_answer >= answers.size()) {
        throw Error(ErrorCode::kMissingOutcome, "answers file ended after " + std::to_string(next_answer) +
                                                    " of " + std::to_string(session.budget()) + " judgments");
      }
      std::string line = answers[next_answer++];
      // "anchor,outcome" lines are checked against the served anchor.
      const auto comma = line.rfind(',');
      if (comma != std::string::npos) {
        const std::string expected = line.substr(0, comma);
        if (expected != anchor) {
          throw Error(ErrorCode::kOutOfOrder, "answer " + std::to_string(next_answer) + " is for '" + expected +
                                                  "' but the pending anchor is '" + anchor + "'");
        }
        line = line.substr(comma + 1);
      }
      outcome = ParseAnswer(line);
      if (!outcome) throw Error(ErrorCode::kParse, "answer " + std::to_string(next_answer) + ": '" + line + "'");
    }
    session.RecordOutcome(q, FirstOutcome(*outcome));
    Log() << "  " << a.word << " vs " << anchor << ": " << OutcomeToken(*outcome) << "\n";
  }
  if (next_answer < answers.size()) Warn("ignored " + std::to_string(answers.size() - next_answer) + " extra answers");

  const SingleMethod method = a.estimator == "mle" ? SingleMethod::kMle : SingleMethod::kMoments;
  const SingleEstimate est = session.Finalize(lexicon.model.distribution, DrawWidth(lexicon.model.t), method);
  std::cout << "word=" << a.word << " score=" << FormatFixed(est.rating) << " method=" << SingleMethodName(est.method)
            << " boundary=" << BoundaryName(est.at_boundary) << " comparisons=" << session.comparisons_used()
            << " search_comparisons=" << session.search_comparisons() << "\n";
  if (est.at_boundary != Boundary::kNone) {
    Warn("estimate is at the search boundary (" + std::string(BoundaryName(est.at_boundary)) +
         "); no score written");
    return 0;
  }
  if (!a.out.empty()) {
    lexicon.entries.push_back({a.word, est.rating, std::nullopt});
    WriteLexiconFile(a.out, lexicon);
  }
  return 0;
}

// --- loo ----------------------------------------------------------------------

struct LooArgs {
  std::string input, truth, m_values = "18", mode = "adaptive", estimator = "moments", out;
  int reps = 100;
  int jitter = 0;
  int reference_reps = 0;
};

// "18", "10,14,18" or "10..30" (inclusive, step 1) or "10..30:2".
std::vector<int> ParseMValues(const std::string& text) {
  std::vector<int> out;
  std::istringstream in(text);
  for (std::string part; std::getline(in, part, ',');) {
    const auto dots = part.find("..");
    try {
      if (dots == std::string::npos) {
        out.push_back(std::stoi(part));
        continue;
      }
      int step = 1;
      std::string hi = part.substr(dots + 2);
      if (const auto colon = hi.find(':'); colon != std::string::npos) {
        step = std::stoi(hi.substr(colon + 1));
        hi = hi.substr(0, colon);
      }
      if (step < 1) throw Error(ErrorCode::kInvalidArgument, "step must be >= 1");
      for (int m = std::stoi(part.substr(0, dots)); m <= std::stoi(hi); m += step) out.push_back(m);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kInvalidArgument, "bad m list '" + text + "'");
    }
  }
  if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "empty m list");
  return out;
}

int RunLoo(const LooArgs& a) {
  const auto table = ReadComparisonsFile(a.input);
  const Distribution dist = g.Dist();
  ModelFit truth;
  std::optional<double> reference;
  if (!a.truth.empty()) {
    const Lexicon lex = ReadLexiconFile(a.truth);
    truth = lex.ToFit();
    std::vector<double> sds;
    for (const auto& e : lex.entries) {
      if (e.bootstrap_sd) sds.push_back(*e.bootstrap_sd);
    }
    if (sds.size() == lex.entries.size() && !sds.empty()) reference = internal::Median(sds);
  } else {
    truth = LsqFit(table.records, dist);
    Log() << "ground truth: least-squares fit of the input, t=" << FormatFixed(truth.draw_width.value()) << "\n";
  }
  if (a.reference_reps >= 2) {
    BootstrapOptions options;
    options.replications = a.reference_reps;
    options.seed = g.seed;
    options.threads = g.threads;
    reference = MedianBootstrapSd(BootstrapSd(table.records, truth.distribution, options));
  }
  LooOptions options;
  options.m_values = ParseMValues(a.m_values);
  options.mode = a.mode == "random" ? SelectionMode::kRandom : SelectionMode::kAdaptive;
  options.seed = g.seed;
  options.monte_carlo_reps = a.reps;
  options.pivot_jitter = a.jitter;
  options.estimator = a.estimator == "mle" ? SingleMethod::kMle : SingleMethod::kMoments;
  options.threads = g.threads;
  LooResult result = LeaveOneOut(table.records, truth, options);
  result.reference_sd = reference;
  Emit(a.out, FormatLooCurve(result));
  return 0;
}

// --- simulate -----------------------------------------------------------------

struct SimulateArgs {
  int n = 199;
  int folds = 2;
  double t = 0.122;
  std::string ratings, out, truth_out;
};

SimulationConfig SimConfig(int n, int folds, double t, const std::string& ratings_path,
                           std::vector<std::string>* names) {
  SimulationConfig config;
  config.n = n;
  config.folds = folds;
  config.distribution = g.Dist();
  config.draw_width = DrawWidth(t);
  config.seed = g.seed;
  if (!ratings_path.empty()) {
    const auto scores = ReadScoresFile(ratings_path);
    config.n = static_cast<int>(scores.size());
    for (const auto& [word, score] : scores) {
      config.true_ratings.push_back(score);
      if (names) names->push_back(word);
    }
  }
  return config;
}

int RunSimulate(const SimulateArgs& a) {
  std::vector<std::string> names;
  const SimulationConfig config = SimConfig(a.n, a.folds, a.t, a.ratings, &names);
  Simulation sim = SimulateRoundRobin(config);
  if (!names.empty()) {
    std::map<std::string, std::string> rename;
    for (std::size_t k = 0; k < names.size(); ++k) rename[sim.items[k]] = names[k];
    for (auto& rec : sim.records) {
      rec.first = rename[rec.first];
      rec.second = rename[rec.second];
    }
    sim.items = names;
  }
  ComparisonTable table;
  table.records = std::move(sim.records);
  Emit(a.out, FormatComparisons(table));
  Log() << "records=" << table.records.size() << " items=" << sim.items.size() << "\n";
  if (!a.truth_out.empty()) {
    const ModelFit truth = sim.TruthFit(config.distribution, config.draw_width);
    WriteLexiconFile(a.truth_out, LexiconFromFit(truth, nullptr, Provenance(table.records.size())));
  }
  return 0;
}

// --- shootout -----------------------------------------------------------------

struct ShootoutArgs {
  int n = 199;
  int folds = 2;
  int groups = 600;
  double t = 0.122;
  bool no_mle = false;
  std::string ratings, out;
};

int RunShootout(const ShootoutArgs& a) {
  const SimulationConfig config = SimConfig(a.n, a.folds, a.t, a.ratings, nullptr);
  ShootoutOptions options;
  options.groups = a.groups;
  options.include_mle = !a.no_mle;
  const ShootoutReport report = EstimatorShootout(config, options);
  for (const auto& row : report.rows) {
    if (!row.error.empty()) Warn(std::string(FamilyName(row.family)) + " " + std::string(FitMethodName(row.method)) +
                                 ": " + row.error);
  }
  Emit(a.out, FormatShootout(report));
  return 0;
}

// --- correlate / density ---------------------------------------------------------

struct CorrelateArgs {
  std::string a, b;
};

int RunCorrelate(const CorrelateArgs& a) {
  const auto left = ReadScoresFile(a.a);
  const auto right = ReadScoresFile(a.b);
  const ScorePairs joined = JoinScores(left, right);
  if (joined.words.size() < 3) throw Error(ErrorCode::kInvalidArgument, "fewer than 3 shared words");
  std::cout << "n=" << joined.words.size() << " r=" << FormatFixed(PearsonCorrelation(joined.a, joined.b)) << "\n";
  return 0;
}

struct DensityArgs {
  std::string input, out;
  double bandwidth = 0.0;
};

int RunDensity(const DensityArgs& a) {
  std::vector<double> values;
  for (const auto& [word, score] : ReadScoresFile(a.input)) values.push_back(score);
  std::optional<double> h;
  if (a.bandwidth > 0.0) h = a.bandwidth;
  Emit(a.out, FormatDensity(DensityExport(values, h)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pairrank: ratings from paired comparisons with draws"};
  app.name("pairrank");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");
  if (const char* env = std::getenv("PAIRRANK_SEED")) {
    try {
      g.seed = std::stoull(env);
    } catch (const std::logic_error&) {
      std::cerr << "error: PAIRRANK_SEED must be a non-negative integer\n";
      return 2;
    }
  }
  app.add_option("--seed", g.seed, "Random seed (fallback: PAIRRANK_SEED, else 0)")->capture_default_str();
  app.add_option("--model", g.model, "Distribution family")
      ->check(CLI::IsMember({"normal", "logistic", "uniform"}))
      ->capture_default_str();
  app.add_option("--sigma", g.sigma, "Standard deviation of the distribution")
      ->check(CLI::PositiveNumber)
      ->default_str("0.333333");
  app.add_flag("--quiet", g.quiet, "Suppress informational messages");
  app.add_option("--threads", g.threads, "Worker threads for bootstrap and loo")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit ratings and draw width; write a lexicon");
  fit_cmd->add_option("--input", fit.input, "Comparisons CSV")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--method", fit.method, "Estimator")
      ->check(CLI::IsMember({"lsq", "mle", "lsq+mle"}))
      ->capture_default_str();
  fit_cmd->add_option("--direct", fit.direct, "Direct grades CSV for origin calibration")->check(CLI::ExistingFile);
  fit_cmd->add_option("--out", fit.out, "Lexicon output (default stdout)");

  GofArgs gof;
  auto* gof_cmd = app.add_subcommand("gof", "Chi-square goodness of fit of a lexicon");
  gof_cmd->add_option("--input", gof.input, "Comparisons CSV")->required()->check(CLI::ExistingFile);
  gof_cmd->add_option("--lexicon", gof.lexicon, "Fitted lexicon")->required()->check(CLI::ExistingFile);
  gof_cmd->add_option("--groups", gof.groups, "Number of |delta r| groups G")
      ->check(CLI::Range(2, 1000000))
      ->capture_default_str();
  gof_cmd->add_option("--groups-out", gof.groups_out, "Per-group table CSV");

  BootstrapArgs boot;
  auto* boot_cmd = app.add_subcommand("bootstrap", "Least-squares fit with bootstrap standard deviations");
  boot_cmd->add_option("--input", boot.input, "Comparisons CSV")->required()->check(CLI::ExistingFile);
  boot_cmd->add_option("--reps", boot.reps, "Bootstrap replications B")
      ->check(CLI::Range(1, 1000000))
      ->capture_default_str();
  boot_cmd->add_option("--direct", boot.direct, "Direct grades CSV for origin calibration")
      ->check(CLI::ExistingFile);
  boot_cmd->add_option("--out", boot.out, "Lexicon output with bootstrap_sd (default stdout)");

  AddWordArgs add;
  auto* add_cmd = app.add_subcommand("add-word", "Insert a new word by adaptive comparisons");
  add_cmd->add_option("--lexicon", add.lexicon, "Lexicon of anchors")->required()->check(CLI::ExistingFile);
  add_cmd->add_option("--word", add.word, "New word")->required();
  add_cmd->add_option("--m", add.m, "Comparisons per fold")->check(CLI::PositiveNumber)->capture_default_str();
  add_cmd->add_option("--folds", add.folds, "Folds")->check(CLI::PositiveNumber)->capture_default_str();
  add_cmd->add_option("--jitter", add.jitter, "Random pivot offset bound")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  add_cmd->add_option("--estimator", add.estimator, "Single-rating estimator")
      ->check(CLI::IsMember({"moments", "mle"}))
      ->capture_default_str();
  auto* interactive = add_cmd->add_flag("--interactive", add.interactive, "Prompt for judgments on the terminal");
  auto* answers = add_cmd->add_option("--answers", add.answers, "File with one judgment per line")
                      ->check(CLI::ExistingFile);
  interactive->excludes(answers);
  add_cmd->add_option("--out", add.out, "Write the lexicon with the new word");
  add_cmd->callback([&] {
    if (!add.interactive && add.answers.empty()) throw CLI::RequiredError("--interactive or --answers");
  });

  LooArgs loo;
  auto* loo_cmd = app.add_subcommand("loo", "Leave-one-out insertion error against m");
  loo_cmd->add_option("--input", loo.input, "Round-robin comparisons CSV")->required()->check(CLI::ExistingFile);
  loo_cmd->add_option("--truth", loo.truth, "Ground-truth lexicon (default: least-squares fit of the input)")
      ->check(CLI::ExistingFile);
  loo_cmd->add_option("--m", loo.m_values, "m values: list or range, e.g. 10..30")->capture_default_str();
  loo_cmd->add_option("--mode", loo.mode, "Anchor selection")
      ->check(CLI::IsMember({"adaptive", "random"}))
      ->capture_default_str();
  loo_cmd->add_option("--reps", loo.reps, "Monte-Carlo repetitions (random mode)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  loo_cmd->add_option("--jitter", loo.jitter, "Random pivot offset bound")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  loo_cmd->add_option("--estimator", loo.estimator, "Single-rating estimator")
      ->check(CLI::IsMember({"moments", "mle"}))
      ->capture_default_str();
  loo_cmd->add_option("--reference-reps", loo.reference_reps,
                      "Bootstrap replications for the reference sd (0: from --truth if present)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  loo_cmd->add_option("--out", loo.out, "Curve CSV output (default stdout)");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulated round-robin comparisons");
  sim_cmd->add_option("--n", sim.n, "Number of items")->check(CLI::Range(2, 100000))->capture_default_str();
  sim_cmd->add_option("--folds", sim.folds, "Judgments per pair")->check(CLI::PositiveNumber)->capture_default_str();
  sim_cmd->add_option("--t", sim.t, "Draw width")->check(CLI::NonNegativeNumber)->capture_default_str();
  sim_cmd->add_option("--ratings", sim.ratings, "word,score file of generating ratings (overrides --n)")
      ->check(CLI::ExistingFile);
  sim_cmd->add_option("--out", sim.out, "Comparisons CSV output (default stdout)");
  sim_cmd->add_option("--truth-out", sim.truth_out, "Lexicon of the generating ratings");

  ShootoutArgs shoot;
  auto* shoot_cmd = app.add_subcommand("shootout", "Goodness of fit of every family and estimator");
  shoot_cmd->add_option("--n", shoot.n, "Number of items")->check(CLI::Range(3, 100000))->capture_default_str();
  shoot_cmd->add_option("--folds", shoot.folds, "Judgments per pair")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  shoot_cmd->add_option("--t", shoot.t, "Draw width")->check(CLI::NonNegativeNumber)->capture_default_str();
  shoot_cmd->add_option("--groups", shoot.groups, "Number of |delta r| groups G")
      ->check(CLI::Range(2, 1000000))
      ->capture_default_str();
  shoot_cmd->add_option("--ratings", shoot.ratings, "word,score file of generating ratings (overrides --n)")
      ->check(CLI::ExistingFile);
  shoot_cmd->add_flag("--no-mle", shoot.no_mle, "Least squares only");
  shoot_cmd->add_option("--out", shoot.out, "Report CSV output (default stdout)");

  CorrelateArgs corr;
  auto* corr_cmd = app.add_subcommand("correlate", "Pearson correlation of two score lists on shared words");
  corr_cmd->add_option("a", corr.a, "Lexicon (.json) or word,score file")->required()->check(CLI::ExistingFile);
  corr_cmd->add_option("b", corr.b, "Lexicon (.json) or word,score file")->required()->check(CLI::ExistingFile);

  DensityArgs dens;
  auto* dens_cmd = app.add_subcommand("density", "Kernel density of scores");
  dens_cmd->add_option("--input", dens.input, "Lexicon (.json) or word,score file")
      ->required()
      ->check(CLI::ExistingFile);
  dens_cmd->add_option("--bandwidth", dens.bandwidth, "Kernel bandwidth (default: rule of thumb)")
      ->check(CLI::NonNegativeNumber);
  dens_cmd->add_option("--out", dens.out, "Density CSV output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;  // --help exits 0
  }

  try {
    g.Dist();
    if (fit_cmd->parsed()) return RunFit(fit);
    if (gof_cmd->parsed()) return RunGof(gof);
    if (boot_cmd->parsed()) return RunBootstrap(boot);
    if (add_cmd->parsed()) return RunAddWord(add);
    if (loo_cmd->parsed()) return RunLoo(loo);
    if (sim_cmd->parsed()) return RunSimulate(sim);
    if (shoot_cmd->parsed()) return RunShootout(shoot);
    if (corr_cmd->parsed()) return RunCorrelate(corr);
    if (dens_cmd->parsed()) return RunDensity(dens);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
