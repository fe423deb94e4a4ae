// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exit code is the number of
// failed criteria.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mudas/mudas.hpp"
#include "pipeline_check.hpp"

namespace fs = std::filesystem;
using namespace mudas;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream ss;
  ss.precision(digits);
  ss << v;
  return ss.str();
}

// ---------------------------------------------------------------------------
// 1. Gradient oracle: >= 20 random small configurations, every parameter
//    gradient of the full six-term loss within relative error 1e-4 of
//    central finite differences; runtime < 30 s.
// ---------------------------------------------------------------------------
Outcome criterion_gradient_oracle() {
  const auto start = std::chrono::steady_clock::now();
  std::size_t total_checked = 0, total_failures = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const pipeline_check::Fixture fx = pipeline_check::make_fixture(seed);
    const pipeline_check::CheckResult res = pipeline_check::check_gradients(fx, 1e-4, 1e-4, 1e-7);
    total_checked += res.checked;
    total_failures += res.failures;
    worst = std::max(worst, res.max_rel_err);
  }
  const double elapsed = seconds_since(start);
  Outcome out;
  out.pass = total_failures == 0 && elapsed < 30.0;
  out.detail = "20 configurations, " + std::to_string(total_checked) + " gradients, " +
               std::to_string(total_failures) + " outside 1e-4 (max rel err " + fmt(worst, 2) +
               "), " + fmt(elapsed, 3) + " s";
  return out;
}

// ---------------------------------------------------------------------------
// 2. Loss identities: the recorded breakdown satisfies the ramped-total
//    identity to 1e-9 on every step of a 50-epoch synthetic run; with all
//    masks empty and t = 0 the total equals l_ws + l_ss exactly.
// ---------------------------------------------------------------------------
Outcome criterion_loss_identities() {
  SyntheticSpec spec;
  spec.dims = 64;
  spec.num_classes = 4;
  spec.samples_source = 200;
  spec.samples_target = 200;
  const auto [source, target] = gen_synthetic(spec, 7);

  ClassifierConfig mc;
  mc.input_dim = spec.dims;
  mc.hidden_dims = {64, 64};
  mc.num_classes = spec.num_classes;
  mc.seed = 7;
  AdaptConfig cfg;
  cfg.epochs = 50;
  cfg.seed = 7;

  UnlabeledSet tgt;
  tgt.embeddings = target.embeddings;
  const AdaptResult res = adapt(source, tgt, cfg, mc);

  double max_gap = 0.0;
  for (const StepRecord& s : res.report.steps) {
    const double recomputed =
        (s.loss.l_ws + s.loss.l_ss) +
        s.loss.t * (s.loss.l_pos + s.loss.l_neg + s.loss.l_pos_div + s.loss.l_neg_div);
    max_gap = std::max(max_gap, std::abs(s.loss.total - recomputed));
    if (!std::isfinite(s.loss.total)) {
      return {false, "non-finite loss at step " + std::to_string(s.step)};
    }
  }

  // empty masks, t = 0: exact reduction to the source losses
  ParameterSet params = init_parameters(mc);
  Rng data_rng(9), step_rng(10);
  SourceBatch sb;
  sb.strong = MatD(8, spec.dims);
  for (auto& v : sb.strong.values()) v = data_rng.uniform(-1.0, 1.0);
  sb.weak = sb.strong;
  sb.labels = LabelMatrix(8, spec.num_classes);
  for (auto& v : sb.labels.values()) v = data_rng.bernoulli(0.3) ? 1 : 0;
  TargetBatch tb;
  tb.strong = MatD(0, spec.dims);
  tb.weak = tb.strong;
  const LossBreakdown empty_case = train_step(params, sb, tb, cfg, 0, 100, step_rng);
  const bool exact = empty_case.total == empty_case.l_ws + empty_case.l_ss &&
                     empty_case.t == 0.0 && empty_case.pos_count == 0 &&
                     empty_case.neg_count == 0;

  Outcome out;
  out.pass = max_gap <= 1e-9 && exact;
  out.detail = std::to_string(res.report.steps.size()) + " steps over 50 epochs, max identity gap " +
               fmt(max_gap, 2) + (exact ? ", empty-mask case exact" : ", empty-mask case NOT exact");
  return out;
}

// ---------------------------------------------------------------------------
// 3. Threshold law: 10,000 random draws keep c+ >= c-, and the two
//    hand-worked cases reproduce exactly.
// ---------------------------------------------------------------------------
Outcome criterion_threshold_law() {
  Rng rng(11);
  std::size_t violations = 0;
  for (int rep = 0; rep < 10000; ++rep) {
    MatD z(1 + rng.uniform_index(8), 1 + rng.uniform_index(5));
    for (auto& v : z.values()) v = rng.uniform01();
    const double tp = 0.02 + 0.98 * rng.uniform01();
    const double tn = 0.02 + 0.98 * rng.uniform01();
    const ThresholdVector th = compute_thresholds(z, tp, tn);
    for (std::size_t c = 0; c < z.cols(); ++c)
      if (!(th.c_plus[c] >= th.c_minus[c]) || th.c_plus[c] < 0.0 || th.c_plus[c] > 1.0 ||
          th.c_minus[c] < 0.0 || th.c_minus[c] > 1.0)
        ++violations;
  }

  MatD plain = MatD::from_rows({{1.0}, {0.0}, {0.5}});
  const ThresholdVector th_plain = compute_thresholds(plain, 0.9, 0.9);
  const bool plain_ok =
      th_plain.c_plus[0] == 0.9 * 1.0 && th_plain.c_minus[0] == 1.0 - 0.9 * (1.0 - 0.0);

  MatD swap_case(2, 1, 0.4);
  const ThresholdVector th_swap = compute_thresholds(swap_case, 0.5, 1.0);
  const bool swap_ok =
      th_swap.c_plus[0] == 1.0 - 1.0 * (1.0 - 0.4) && th_swap.c_minus[0] == 0.5 * 0.4;

  Outcome out;
  out.pass = violations == 0 && plain_ok && swap_ok;
  out.detail = "10000 draws, " + std::to_string(violations) + " order violations; 0.9/0.1 case " +
               (plain_ok ? "exact" : "WRONG") + ", swap case " + (swap_ok ? "exact" : "WRONG");
  return out;
}

// ---------------------------------------------------------------------------
// 4. Alignment law: outputs always in [0,1]; identity at equal means; the
//    0.5*(0.4/0.2) cap case yields exactly 1.0.
// ---------------------------------------------------------------------------
Outcome criterion_alignment_law() {
  Rng rng(12);
  std::size_t violations = 0;
  for (int rep = 0; rep < 2000; ++rep) {
    MatD z(1 + rng.uniform_index(6), 1 + rng.uniform_index(4));
    for (auto& v : z.values()) v = rng.uniform01();
    AlignmentStats st;
    st.mean_ws.resize(z.cols());
    st.mean_wt.resize(z.cols());
    for (auto& v : st.mean_ws) v = rng.uniform01();
    for (auto& v : st.mean_wt) v = rng.uniform01();
    const MatD aligned = align_distribution(z, st);
    for (double v : aligned.values())
      if (!(v >= 0.0 && v <= 1.0)) ++violations;
  }

  MatD z_id = MatD::from_rows({{0.3, 0.8}, {0.6, 0.2}});
  AlignmentStats same;
  same.mean_ws = {0.47, 0.31};
  same.mean_wt = {0.47, 0.31};
  const bool identity_ok = align_distribution(z_id, same) == z_id;

  MatD z_cap(1, 1, 0.5);
  AlignmentStats cap;
  cap.mean_ws = {0.4};
  cap.mean_wt = {0.2};
  const bool cap_ok = align_distribution(z_cap, cap)(0, 0) == 1.0;

  Outcome out;
  out.pass = violations == 0 && identity_ok && cap_ok;
  out.detail = std::to_string(violations) + " range violations; identity " +
               (identity_ok ? "exact" : "WRONG") + "; cap case " +
               (cap_ok ? "exactly 1.0" : "WRONG");
  return out;
}

// ---------------------------------------------------------------------------
// 5. Metric oracles: hand fixture, brute-force oracle on 100 random 20x3
//    fixtures to 1e-9, constant scores give prevalence.
// ---------------------------------------------------------------------------
double brute_force_ap(const std::vector<std::uint8_t>& y, const std::vector<double>& s) {
  std::vector<double> thresholds = s;
  std::sort(thresholds.begin(), thresholds.end(), std::greater<double>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  std::size_t total_pos = 0;
  for (auto v : y) total_pos += v ? 1 : 0;
  double ap = 0.0, prev_recall = 0.0;
  for (double t : thresholds) {
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s[i] >= t) (y[i] ? tp : fp) += 1;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

Outcome criterion_metric_oracles() {
  const std::vector<std::uint8_t> y_hand = {1, 0, 1};
  const std::vector<double> s_hand = {0.9, 0.8, 0.7};
  const bool hand_ok = std::abs(average_precision(y_hand, s_hand) - 5.0 / 6.0) <= 1e-9;

  Rng rng(3);
  double max_gap = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<std::uint8_t> y(20 * 3);
    std::vector<double> s(20 * 3);
    bool any = false;
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] = rng.bernoulli(0.3) ? 1 : 0;
      any |= y[i] != 0;
      s[i] = std::floor(rng.uniform01() * 16.0) / 16.0;
    }
    if (!any) y[0] = 1;
    max_gap = std::max(max_gap, std::abs(average_precision(y, s) - brute_force_ap(y, s)));
  }

  std::vector<std::uint8_t> y_const = {1, 0, 0, 1, 0, 0, 0, 1};
  std::vector<double> s_const(8, 0.77);
  const bool const_ok = average_precision(y_const, s_const) == 3.0 / 8.0;

  Outcome out;
  out.pass = hand_ok && max_gap <= 1e-9 && const_ok;
  out.detail = std::string("hand fixture ") + (hand_ok ? "ok" : "WRONG") +
               "; 100 random fixtures max oracle gap " + fmt(max_gap, 2) + "; constant-score AP " +
               (const_ok ? "equals prevalence" : "WRONG");
  return out;
}

// ---------------------------------------------------------------------------
// 6. Selection oracle: 100 random streams vs brute-force top-N; the 0.475
//    hand case exact.
// ---------------------------------------------------------------------------
Outcome criterion_selection_oracle() {
  Rng rng(14);
  std::size_t mismatches = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t capacity = 1 + rng.uniform_index(256);
    const std::size_t length = 1 + rng.uniform_index(10000);
    SelectionBuffer buf(capacity);
    std::vector<double> stream(length);
    for (std::size_t i = 0; i < length; ++i) {
      stream[i] = std::floor(rng.uniform01() * 64.0) / 64.0;
      Embedding e;
      e.values = {static_cast<float>(i)};
      buf.offer(std::move(e), stream[i]);
    }
    std::vector<std::size_t> idx(length);
    for (std::size_t i = 0; i < length; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (stream[a] != stream[b]) return stream[a] > stream[b];
      return a < b;
    });
    idx.resize(std::min(capacity, length));
    const auto ranked = buf.ranked();
    if (ranked.size() != idx.size()) {
      ++mismatches;
      continue;
    }
    for (std::size_t i = 0; i < idx.size(); ++i)
      if (ranked[i].arrival != idx[i]) {
        ++mismatches;
        break;
      }
  }

  SourceRangeStats ranges;
  ranges.max_ws = {0.8, 0.5};
  ranges.min_ws = {0.0, 0.0};
  ClassWeights w;
  w.w = {0.75, 0.25};
  const double expected = (0.75 * 0.8 / 0.8 + 0.25 * 0.4 / 0.5) / 2.0;  // 0.475
  const bool hand_ok = d_score({0.8, 0.4}, ranges, w) == expected;

  Outcome out;
  out.pass = mismatches == 0 && hand_ok;
  out.detail = "100 streams, " + std::to_string(mismatches) + " oracle mismatches; 0.475 case " +
               (hand_ok ? "exact" : "WRONG");
  return out;
}

// ---------------------------------------------------------------------------
// 7. Synthetic adaptation gain: default spec, seeds 1..5; mean adapted
//    micro-AUPRC beats the source-only lower bound by >= 0.02 and stays
//    within +0.01 of the target-trained upper bound; runtime < 5 min.
// 8. No-shift control: adaptation moves target micro-AUPRC by at most
//    0.05 relative to the lower bound when there is no shift.
// ---------------------------------------------------------------------------
struct BenchResult {
  double lower = 0.0, adapted = 0.0, upper = 0.0, lower_source = 0.0;
};

BenchResult run_bench(const SyntheticSpec& spec, std::uint64_t seed) {
  const auto [source, target] = gen_synthetic(spec, seed);
  ClassifierConfig mc;
  mc.input_dim = spec.dims;
  mc.num_classes = spec.num_classes;
  mc.seed = seed;
  AdaptConfig cfg;
  cfg.seed = seed;

  UnlabeledSet tgt;
  tgt.embeddings = target.embeddings;

  BenchResult r;
  const AdaptResult lower = train_supervised(source, cfg, mc);
  r.lower = micro_auprc(target.labels, predict(lower.params, target.embeddings));
  r.lower_source = micro_auprc(source.labels, predict(lower.params, source.embeddings));
  const AdaptResult adapted = adapt(source, tgt, cfg, mc);
  r.adapted = micro_auprc(target.labels, predict(adapted.params, target.embeddings));
  const AdaptResult upper = train_supervised(target, cfg, mc);
  r.upper = micro_auprc(target.labels, predict(upper.params, target.embeddings));
  return r;
}

Outcome criterion_synthetic_gain() {
  const auto start = std::chrono::steady_clock::now();
  const SyntheticSpec spec;  // defaults: k=6, d=256, 500/500, shifted
  double lower_sum = 0.0, adapt_sum = 0.0, upper_sum = 0.0, degr_sum = 0.0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const BenchResult r = run_bench(spec, seed);
    lower_sum += r.lower;
    adapt_sum += r.adapted;
    upper_sum += r.upper;
    degr_sum += r.lower_source - r.lower;
    per_seed += " s" + std::to_string(seed) + ":" + fmt(r.adapted - r.lower, 3);
  }
  const double elapsed = seconds_since(start);
  const double mean_lower = lower_sum / 5.0, mean_adapt = adapt_sum / 5.0,
               mean_upper = upper_sum / 5.0;
  Outcome out;
  out.pass = mean_adapt - mean_lower >= 0.02 && mean_adapt <= mean_upper + 0.01 &&
             degr_sum / 5.0 > 0.0 && elapsed < 300.0;
  out.detail = "mean lower " + fmt(mean_lower) + ", adapted " + fmt(mean_adapt) + " (gain " +
               fmt(mean_adapt - mean_lower, 3) + "), upper " + fmt(mean_upper) +
               ", shift degradation " + fmt(degr_sum / 5.0, 3) + ", gains per seed:" + per_seed +
               ", " + fmt(elapsed, 3) + " s";
  return out;
}

Outcome criterion_no_shift_control() {
  SyntheticSpec spec;
  spec.shift_rotation = 0.0;
  spec.shift_translation = 0.0;
  double gap_sum = 0.0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 2; ++seed) {
    const auto [source, target] = gen_synthetic(spec, seed);
    ClassifierConfig mc;
    mc.input_dim = spec.dims;
    mc.num_classes = spec.num_classes;
    mc.seed = seed;
    AdaptConfig cfg;
    cfg.seed = seed;
    UnlabeledSet tgt;
    tgt.embeddings = target.embeddings;

    const AdaptResult lower = train_supervised(source, cfg, mc);
    const double lower_tgt = micro_auprc(target.labels, predict(lower.params, target.embeddings));
    const AdaptResult adapted = adapt(source, tgt, cfg, mc);
    const double adapt_tgt =
        micro_auprc(target.labels, predict(adapted.params, target.embeddings));
    gap_sum += adapt_tgt - lower_tgt;
    per_seed += " s" + std::to_string(seed) + ":" + fmt(adapt_tgt - lower_tgt, 3);
  }
  const double mean_gap = gap_sum / 2.0;
  Outcome out;
  out.pass = std::abs(mean_gap) <= 0.05;
  out.detail = "mean adapted-minus-lower gap " + fmt(mean_gap, 3) + " (|gap| <= 0.05)," + per_seed;
  return out;
}

// ---------------------------------------------------------------------------
// 9. Augmentation laws: double reversal identity, union bound on zeroed
//    cells, total masking yields the zero grid.
// ---------------------------------------------------------------------------
Outcome criterion_augmentation_laws() {
  Rng rng(15);
  Spectrogram s;
  s.grid = MatF(24, 18);
  for (auto& v : s.grid.values()) v = static_cast<float>(rng.uniform(0.1, 3.0));

  const bool involution_ok = time_reverse(time_reverse(s)).grid == s.grid;

  bool bound_ok = true;
  for (int rep = 0; rep < 50; ++rep) {
    SpecAugmentConfig cfg;
    cfg.num_time_masks = 1 + rng.uniform_index(3);
    cfg.num_freq_masks = 1 + rng.uniform_index(3);
    cfg.max_time_width = 1 + rng.uniform_index(s.frames());
    cfg.max_freq_width = 1 + rng.uniform_index(s.bins());
    const Spectrogram masked = strong_augment(s, cfg, rng);
    std::size_t zeroed = 0;
    for (float v : masked.grid.values())
      if (v == 0.0f) ++zeroed;
    const double bound =
        static_cast<double>(cfg.num_time_masks * cfg.max_time_width) / s.frames() +
        static_cast<double>(cfg.num_freq_masks * cfg.max_freq_width) / s.bins();
    if (static_cast<double>(zeroed) / s.grid.size() > bound + 1e-12) bound_ok = false;
  }

  Spectrogram total = s;
  apply_time_mask(total, {0, total.frames()});
  bool total_ok = true;
  for (float v : total.grid.values())
    if (v != 0.0f) total_ok = false;

  Outcome out;
  out.pass = involution_ok && bound_ok && total_ok;
  out.detail = std::string("double reversal ") + (involution_ok ? "identity" : "WRONG") +
               "; union bound " + (bound_ok ? "holds on 50 draws" : "VIOLATED") +
               "; total mask " + (total_ok ? "zero grid" : "WRONG");
  return out;
}

// ---------------------------------------------------------------------------
// 10. Reproducibility: rerunning CLI commands with identical config and
//     seed produces byte-identical model files and metric outputs.
// ---------------------------------------------------------------------------
std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int run_cmd(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome criterion_cli_reproducibility() {
  const fs::path dir = fs::temp_directory_path() / "mudas_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cli = MUDAS_CLI_PATH;
  const fs::path cfg = dir / "run.cfg";
  std::ofstream(cfg) << "dims=24\ninput_dim=24\nclasses=3\nhidden_dims=16\nepochs=3\n"
                        "batch_source=16\nbatch_target=16\nsamples_source=48\nsamples_target=48\n";

  auto quiet = [&](const std::string& args, const fs::path& out_file) {
    return cli + " " + args + " > " + out_file.string() + " 2>&1";
  };

  for (const char* round : {"a", "b"}) {
    const fs::path sub = dir / round;
    fs::create_directories(sub);
    if (run_cmd(quiet("gen --config " + cfg.string() + " --seed 13 --out " +
                          (sub / "data").string(),
                      sub / "gen.txt")) != 0)
      return {false, "gen failed"};
    if (run_cmd(quiet("train-source --config " + cfg.string() + " --seed 13 --embeddings " +
                          (sub / "data/source_embeddings.emb1").string() + " --labels " +
                          (sub / "data/source_labels.csv").string() + " --out " +
                          (sub / "source.mud1").string(),
                      sub / "train.txt")) != 0)
      return {false, "train-source failed"};
    if (run_cmd(quiet("adapt --config " + cfg.string() + " --seed 13 --source-embeddings " +
                          (sub / "data/source_embeddings.emb1").string() + " --source-labels " +
                          (sub / "data/source_labels.csv").string() + " --target-embeddings " +
                          (sub / "data/target_embeddings.emb1").string() + " --out " +
                          (sub / "adapted.mud1").string(),
                      sub / "adapt.txt")) != 0)
      return {false, "adapt failed"};
    if (run_cmd(quiet("eval --model " + (sub / "adapted.mud1").string() + " --embeddings " +
                          (sub / "data/target_embeddings.emb1").string() + " --labels " +
                          (sub / "data/target_labels.csv").string(),
                      sub / "eval.txt")) != 0)
      return {false, "eval failed"};
  }

  // the eval output echoes the model path, which necessarily differs
  // between the two rounds; everything else must match byte for byte
  const auto strip_path_echo = [](std::string text) {
    std::istringstream is(text);
    std::string line, kept;
    while (std::getline(is, line))
      if (line.rfind("model=", 0) != 0) kept += line + "\n";
    return kept;
  };

  std::vector<std::string> mismatched;
  for (const char* rel :
       {"data/source_embeddings.emb1", "data/source_labels.csv", "data/target_embeddings.emb1",
        "data/target_labels.csv", "source.mud1", "adapted.mud1"}) {
    if (slurp(dir / "a" / rel) != slurp(dir / "b" / rel)) mismatched.push_back(rel);
  }
  if (strip_path_echo(slurp(dir / "a" / "eval.txt")) !=
      strip_path_echo(slurp(dir / "b" / "eval.txt")))
    mismatched.push_back("eval.txt");

  Outcome out;
  out.pass = mismatched.empty();
  if (out.pass) {
    out.detail = "gen + train-source + adapt + eval byte-identical across reruns";
  } else {
    out.detail = "mismatched outputs:";
    for (const auto& m : mismatched) out.detail += " " + m;
  }
  return out;
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Entry> criteria = {
      {1, "gradient-oracle", criterion_gradient_oracle},
      {2, "loss-identities", criterion_loss_identities},
      {3, "threshold-law", criterion_threshold_law},
      {4, "alignment-law", criterion_alignment_law},
      {5, "metric-oracles", criterion_metric_oracles},
      {6, "selection-oracle", criterion_selection_oracle},
      {7, "synthetic-adaptation-gain", criterion_synthetic_gain},
      {8, "no-shift-control", criterion_no_shift_control},
      {9, "augmentation-laws", criterion_augmentation_laws},
      {10, "cli-reproducibility", criterion_cli_reproducibility},
  };

  int failures = 0;
  for (const Entry& c : criteria) {
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    if (!out.pass) ++failures;
    std::cout << "[" << (c.id < 10 ? " " : "") << c.id << "] "
              << (out.pass ? "PASS" : "FAIL") << " " << c.name << " — " << out.detail << "\n";
    std::cout.flush();
  }
  if (failures) std::cout << failures << " criterion(s) failed\n";
  return failures;
}
