// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "paircal/cli.hpp"
#include "paircal/decode.hpp"
#include "paircal/distfree.hpp"
#include "paircal/eval.hpp"
#include "paircal/lake.hpp"
#include "paircal/mlp.hpp"
#include "paircal/models.hpp"
#include "paircal/pcfg.hpp"
#include "paircal/pi.hpp"
#include "paircal/random.hpp"
#include "paircal/sin1d.hpp"
#include "svg.hpp"

namespace fs = std::filesystem;

namespace paircal::cli {

namespace {

constexpr std::uint64_t kEvalStream = 0xE7A1;
constexpr std::uint64_t kBoundStream = 0xB0D5;
constexpr std::uint64_t kDecodeStream = 0xDEC0;
constexpr std::uint64_t kRankStream = 0x4A4C;
constexpr std::uint64_t kMemberSeedStream = 0xE45E;

TaskId task_of(const Json& c) { return task_from_string(c["task"].get<std::string>()); }
fs::path out_dir(const Json& c) { return fs::path(c["out"].get<std::string>()); }
std::uint64_t seed_of(const Json& c) { return c["seed"].get<std::uint64_t>(); }
std::uint64_t derived_seed(const Json& c, std::uint64_t stream) { return substream(seed_of(c), stream)(); }

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::IoFailure, "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), ErrorCode::IoFailure, "write to " + path.string() + " failed");
}

std::string read_text(const fs::path& path) {
  require(fs::exists(path), ErrorCode::MissingArtifact, "missing artifact " + path.string());
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::IoFailure, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json(const fs::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::IoFailure, path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string str() const {
    std::string s;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
      s += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return s;
  }
};

Csv parse_csv(const std::string& text) {
  Csv csv;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (first) csv.header = std::move(cells), first = false;
    else csv.rows.push_back(std::move(cells));
  }
  return csv;
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Runs `fn`, then records the config and wall-clock times.
template <class Fn>
void with_metadata(const Json& config, const std::string& command, Fn&& fn) {
  const fs::path out = out_dir(config);
  std::error_code ec;
  fs::create_directories(out, ec);
  require(fs::is_directory(out), ErrorCode::IoFailure, "cannot create output directory " + out.string());
  const std::string started = timestamp();
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_json(out / "config.json", config);
  Json meta = Json::object();
  if (fs::exists(out / "metadata.json")) {
    try {
      meta = Json::parse(read_text(out / "metadata.json"));
    } catch (const nlohmann::json::exception&) {
      meta = Json::object();
    }
  }
  meta[command] = {{"started", started}, {"finished", timestamp()}, {"seconds", seconds}};
  write_json(out / "metadata.json", meta);
}

// ---- models -----------------------------------------------------------------

MlpConfig mlp_config(const Json& c) {
  MlpConfig m;
  m.width = c["model"]["width"].get<std::size_t>();
  m.inner = c["model"]["inner"].get<std::size_t>();
  m.blocks = c["model"]["blocks"].get<std::size_t>();
  m.head = head_kind_from_string(c["model"]["head"].get<std::string>());
  return m;
}

TrainConfig train_config(const Json& c, std::uint64_t seed) {
  TrainConfig t;
  t.iterations = c["train"]["iterations"].get<std::size_t>();
  t.batch_size = c["train"]["batch_size"].get<std::size_t>();
  t.max_learning_rate = c["train"]["learning_rate"].get<double>();
  t.warmup_steps = c["train"]["warmup_steps"].get<std::size_t>();
  t.weight_decay = c["train"]["weight_decay"].get<double>();
  t.precision = precision_from_string(c["train"]["precision"].get<std::string>());
  t.log_every = c["train"]["log_every"].get<std::size_t>();
  t.seed = seed;
  return t;
}

Json mlp_to_json(const MlpPairModel& m) {
  const auto& c = m.config();
  Json cfg{{"input_dim", c.input_dim}, {"width", c.width}, {"inner", c.inner},
           {"blocks", c.blocks},       {"head", to_string(c.head)}, {"classes", c.classes},
           {"layer_norm_eps", c.layer_norm_eps}};
  const auto p = m.parameters();
  return Json{{"config", cfg}, {"parameters", std::vector<double>(p.begin(), p.end())}};
}

MlpPairModel mlp_from_json(const Json& j) {
  try {
    const auto& cj = j.at("config");
    MlpConfig c;
    c.input_dim = cj.at("input_dim").get<std::size_t>();
    c.width = cj.at("width").get<std::size_t>();
    c.inner = cj.at("inner").get<std::size_t>();
    c.blocks = cj.at("blocks").get<std::size_t>();
    c.head = head_kind_from_string(cj.at("head").get<std::string>());
    c.classes = cj.at("classes").get<std::size_t>();
    c.layer_norm_eps = cj.at("layer_norm_eps").get<double>();
    return mlp_from_parameters(c, j.at("parameters").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::IoFailure, std::string("malformed model checkpoint: ") + e.what());
  }
}

struct Sin1dModels {
  MlpPairModel pair;
  std::vector<MlpPairModel> members;
};

Sin1dModels load_sin1d_models(const Json& c) {
  const Json j = read_json(out_dir(c) / "model.json");
  require(j.value("kind", "") == "mlp", ErrorCode::IoFailure, "model.json does not hold an MLP");
  Sin1dModels m{mlp_from_json(j.at("pair_model")), {}};
  for (const auto& mj : j.value("ensemble", Json::array())) m.members.push_back(mlp_from_json(mj));
  return m;
}

PiPairModel pi_model_from(const Json& c) {
  const double sd = c["model"]["perturbation_log_sd"].get<double>();
  if (sd > 0.0) return PiPairModel(PiPerturbation{sd, seed_of(c)});
  return PiPairModel();
}

void require_model(const Json& c, const std::string& kind) {
  const Json j = read_json(out_dir(c) / "model.json");
  require(j.value("kind", "") == kind, ErrorCode::IoFailure, "model.json holds '" + j.value("kind", "") +
                                                                 "', expected '" + kind + "'");
}

PiPairModel load_pi_model(const Json& c) {
  const Json j = read_json(out_dir(c) / "model.json");
  require(j.value("kind", "") == "pi-bucket-mixture", ErrorCode::IoFailure, "model.json is not a pi model");
  if (j.at("perturbation").is_null()) return PiPairModel();
  return PiPairModel(PiPerturbation{j["perturbation"].at("log_sd").get<double>(),
                                    j["perturbation"].at("seed").get<std::uint64_t>()});
}

// ---- train ------------------------------------------------------------------

void train_sin1d(const Json& c) {
  const auto file = read_dataset((out_dir(c) / "data.jsonl").string());
  const auto examples = sin1d_from_records(file);
  const PairDataset data = PairDataset::from_examples(examples);
  const auto tc = train_config(c, seed_of(c));
  auto result = paircal::train(MlpPairModel(mlp_config(c), seed_of(c)), data, tc);

  Csv loss{{"step", "loss", "penalty"}, {}};
  for (const auto& p : result.trace) loss.rows.push_back({std::to_string(p.step), fmt(p.loss), fmt(p.penalty)});
  write_text(out_dir(c) / "loss.csv", loss.str());

  Json model{{"format", "paircal.model.v1"}, {"task", "sin1d"}, {"kind", "mlp"}};
  model["pair_model"] = mlp_to_json(result.model);
  Json members = Json::array();
  const auto n_members = c["model"]["ensemble_members"].get<std::size_t>();
  for (std::size_t i = 0; i < n_members; ++i) {
    MlpConfig mc = mlp_config(c);
    mc.head = HeadKind::Bernoulli;
    const std::uint64_t s = substream(seed_of(c), kMemberSeedStream, i)();
    auto r = paircal::train(MlpPairModel(mc, s), data, train_config(c, s));
    members.push_back(mlp_to_json(r.model));
  }
  model["ensemble"] = members;
  write_json(out_dir(c) / "model.json", model);
}

void train_pi(const Json& c) {
  const auto model = pi_model_from(c);
  Json buckets = Json::array();
  for (std::size_t b = 0; b < PiPairModel::bucket_count(); ++b) {
    const auto [lo, hi] = PiPairModel::bucket_range(b);
    const auto& w = model.digit_weights(b);
    buckets.push_back({{"first", lo}, {"last", hi}, {"digit_weights", std::vector<double>(w.begin(), w.end())}});
  }
  Json j{{"format", "paircal.model.v1"}, {"task", "pi"}, {"kind", "pi-bucket-mixture"}};
  j["perturbation"] = model.perturbed() ? Json{{"log_sd", model.perturbation()->log_sd},
                                               {"seed", model.perturbation()->seed}}
                                        : Json(nullptr);
  j["buckets"] = buckets;
  write_json(out_dir(c) / "model.json", j);
}

void train_lake(const Json& c) {
  (void)c;
  const LakePairOracle oracle;
  Json experts = Json::array();
  for (int k = 0; k < kLakePatches; ++k) {
    const auto& e = oracle.expert(k);
    Json policy = Json::array();
    for (const auto& row : e.probs) policy.push_back(std::vector<double>(row.begin(), row.end()));
    experts.push_back({{"patch", {{"c", e.patch.c}, {"r", e.patch.r}}}, {"sweeps", e.sweeps}, {"policy", policy}});
  }
  Json j{{"format", "paircal.model.v1"}, {"task", "lake"}, {"kind", "lake-view-mixture"},
         {"action_order", {"left", "right", "up", "down"}}, {"experts", experts}};
  write_json(out_dir(c) / "model.json", j);
}

// ---- eval -------------------------------------------------------------------

std::vector<double> beta_grid(const Json& c) {
  std::vector<double> betas;
  for (int i = 1; i <= 50; ++i) betas.push_back(0.01 * i);
  for (const auto& b : c["eval"]["betas"]) betas.push_back(b.get<double>());
  std::sort(betas.begin(), betas.end());
  betas.erase(std::unique(betas.begin(), betas.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
              betas.end());
  return betas;
}

Json reliability_json(const BinnedReliability& r) {
  return Json{{"kind", to_string(r.kind)}, {"value", r.value}, {"total", r.total}, {"bins", r.bins.size()}};
}

Csv reliability_csv(const BinnedReliability& r) {
  Csv csv{{"bin", "lower", "upper", "count", "mean_predicted", "mean_realized"}, {}};
  for (std::size_t b = 0; b < r.bins.size(); ++b) {
    const auto& bin = r.bins[b];
    csv.rows.push_back({std::to_string(b), fmt(bin.lower), fmt(bin.upper), std::to_string(bin.count),
                        fmt(bin.mean_predicted), fmt(bin.mean_realized)});
  }
  return csv;
}

void eval_sin1d(const Json& c) {
  const auto models = load_sin1d_models(c);
  const fs::path dir = out_dir(c) / "eval";
  const auto bins = c["eval"]["bins"].get<std::size_t>();

  const auto g = c["eval"]["grid_points"].get<std::size_t>();
  std::vector<double> grid(g);
  for (std::size_t i = 0; i < g; ++i) grid[i] = -3.0 + 6.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(g);
  const auto gp = models.pair.predict_binary(grid);
  std::vector<std::vector<BinaryPrediction>> member_grid;
  for (const auto& m : models.members) member_grid.push_back(m.predict_binary(grid));
  Csv profile{{"x", "p_true", "p_hat", "v_cheat", "sq_err", "naive_var"}, {}};
  if (!models.members.empty()) profile.header.push_back("ensemble_var");
  for (std::size_t i = 0; i < g; ++i) {
    const double p = sin1d_prob(grid[i]);
    std::vector<std::string> row{fmt(grid[i]), fmt(p), fmt(gp[i].p_hat), fmt(gp[i].v_hat),
                                 fmt((gp[i].p_hat - p) * (gp[i].p_hat - p)), fmt(naive_variance(gp[i].p_hat))};
    if (!models.members.empty()) {
      std::vector<double> ps;
      for (const auto& mg : member_grid) ps.push_back(mg[i].p_hat);
      row.push_back(fmt(models.members.size() >= 2 ? ensemble_predict(ps).variance : 0.0));
    }
    profile.rows.push_back(std::move(row));
  }
  write_text(dir / "variance_profile.csv", profile.str());

  const auto xs = sin1d_inputs(c["eval"]["test_n"].get<std::size_t>(), seed_of(c), kEvalStream);
  const auto pred = models.pair.predict_binary(xs);
  std::vector<ValueRecord> r1, r2, r2n;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double p = sin1d_prob(xs[i]);
    const double err = (pred[i].p_hat - p) * (pred[i].p_hat - p);
    r1.push_back({pred[i].p_hat, p});
    r2.push_back({pred[i].v_hat, err});
    r2n.push_back({naive_variance(pred[i].p_hat), err});
  }
  const auto e1 = ece1(r1, bins);
  const auto e2 = ece2(r2, bins);
  const auto e2n = ece2(r2n, bins);
  write_text(dir / "ece1.csv", reliability_csv(e1).str());
  write_text(dir / "ece2_cheat.csv", reliability_csv(e2).str());
  write_text(dir / "ece2_naive.csv", reliability_csv(e2n).str());

  Csv cov{{"beta", "failure_rate_cheat", "mean_width_cheat"}, {}};
  for (double beta : beta_grid(c)) {
    std::size_t bad = 0;
    double width = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      CheatScore s;
      s.p_marginal = pred[i].p_hat;
      s.v_cheat = pred[i].v_hat;
      const auto iv = chebyshev_interval(s, beta);
      bad += iv.contains(sin1d_prob(xs[i])) ? 0 : 1;
      width += iv.width();
    }
    cov.rows.push_back({fmt(beta), fmt(static_cast<double>(bad) / static_cast<double>(xs.size())),
                        fmt(width / static_cast<double>(xs.size()))});
  }
  write_text(dir / "coverage_vs_beta.csv", cov.str());

  Json summary{{"task", "sin1d"},
               {"test_n", xs.size()},
               {"ece1", reliability_json(e1)},
               {"ece2_cheat", reliability_json(e2)},
               {"ece2_naive", reliability_json(e2n)}};
  write_json(dir / "eval_summary.json", summary);
}

Csv confidence_csv(const BinnedReliability& r) {
  Csv csv{{"bin", "lower", "upper", "count", "mean_confidence", "hallucination_rate"}, {}};
  for (std::size_t b = 0; b < r.bins.size(); ++b) {
    const auto& bin = r.bins[b];
    csv.rows.push_back({std::to_string(b), fmt(bin.lower), fmt(bin.upper), std::to_string(bin.count),
                        fmt(bin.mean_predicted), fmt(bin.mean_realized)});
  }
  return csv;
}

Csv ranking_csv(const std::vector<RankingCurve>& curves) {
  Csv csv{{"strategy", "response_rate", "hallucination_rate"}, {}};
  for (const auto& curve : curves)
    for (int i = 1; i <= 100; ++i) {
      const double rate = i / 100.0;
      csv.rows.push_back({curve.strategy, fmt(rate), fmt(curve.hallucination_at(rate))});
    }
  return csv;
}

std::vector<std::string> all_strategies() {
  return {strategy::kTotalLogProb, strategy::kAvgTokenLogProb,   strategy::kCluster10,
          strategy::kCluster120,   strategy::kOneMinusC,         strategy::kAbsOneMinusC,
          strategy::kOneMinusMinOneC, strategy::kOneMinusMinCInv};
}

void add_confidence_scores(RankingSample& s, double confidence) {
  s.scores[strategy::kOneMinusC] = score_one_minus_c(confidence);
  s.scores[strategy::kAbsOneMinusC] = score_abs_one_minus_c(confidence);
  s.scores[strategy::kOneMinusMinOneC] = score_one_minus_min_one_c(confidence);
  s.scores[strategy::kOneMinusMinCInv] = score_one_minus_min_c_inv_c(confidence);
}

void eval_pi(const Json& c) {
  const auto model = load_pi_model(c);
  const fs::path dir = out_dir(c) / "eval";
  Rng rng = substream(seed_of(c), kEvalStream);
  const auto n = c["eval"]["samples"].get<std::size_t>();
  std::vector<ConfidenceSample> conf;
  std::vector<CheatScore> scores;
  std::size_t halluc = 0, above_one = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t offset = pi_query_sampler(rng);
    const std::string y = model.sample(offset, rng);
    const auto s = model.score(offset, y);
    const bool h = pi_is_hallucination(offset, y);
    conf.push_back({s.confidence, h});
    scores.push_back(s);
    halluc += h ? 1 : 0;
    above_one += s.confidence > 1.0 + 1e-9 ? 1 : 0;
  }
  const auto cvh = confidence_vs_hallucination(conf, c["eval"]["confidence_bins"].get<std::size_t>());
  write_text(dir / "confidence_vs_hallucination.csv", confidence_csv(cvh).str());

  const auto queries = c["eval"]["ranking_queries"].get<std::size_t>();
  const auto group = c["eval"]["group_size"].get<std::size_t>();
  Rng rrng = substream(seed_of(c), kRankStream);
  std::vector<RankingSample> samples;
  for (std::size_t q = 0; q < queries; ++q) {
    const std::size_t offset = pi_query_sampler(rrng);
    std::vector<std::string> ys, keys;
    for (std::size_t k = 0; k < group; ++k) {
      ys.push_back(model.sample(offset, rrng));
      keys.push_back(semantic_key(ys.back()));
    }
    const auto c10 = cluster_scores(keys, 10);
    const auto c120 = cluster_scores(keys, 120);
    for (std::size_t k = 0; k < group; ++k) {
      const auto s = model.score(offset, ys[k]);
      RankingSample rs{ys[k], {}, pi_is_hallucination(offset, ys[k])};
      const double lp = std::log(s.p_marginal);
      rs.scores[strategy::kTotalLogProb] = lp;
      rs.scores[strategy::kAvgTokenLogProb] = lp / static_cast<double>(tokenize(ys[k]).size());
      rs.scores[strategy::kCluster10] = c10[k];
      rs.scores[strategy::kCluster120] = c120[k];
      add_confidence_scores(rs, s.confidence);
      samples.push_back(std::move(rs));
    }
  }
  const auto strategies = all_strategies();
  const auto curves = ranking_comparison(samples, strategies, seed_of(c));
  write_text(dir / "ranking_curves.csv", ranking_csv(curves).str());

  const auto hb = hallucination_bound_report(scores);
  Json summary{{"task", "pi"},
               {"samples", n},
               {"hallucination_rate", static_cast<double>(halluc) / static_cast<double>(n)},
               {"hallucination_bound", hb.bound},
               {"confidence_above_one", above_one},
               {"worst_bin_excess", cvh.value},
               {"ranking_samples", samples.size()}};
  write_json(dir / "eval_summary.json", summary);
}

std::string view_name(const LakeView& v) { return v.hidden ? "hidden" : "full"; }

void eval_lake(const Json& c) {
  require_model(c, "lake-view-mixture");
  const LakePairOracle oracle;
  const fs::path dir = out_dir(c) / "eval";
  Rng rng = substream(seed_of(c), kEvalStream);
  const auto n = c["eval"]["samples"].get<std::size_t>();
  const double hidden_fraction = c["data"]["hidden_fraction"].get<double>();
  Csv csv{{"view", "patch", "p_hat", "confidence", "touches_lake", "hallucination", "trajectory"}, {}};
  std::vector<ConfidenceSample> conf;
  std::map<std::string, std::array<std::size_t, 3>> counts;  // samples, lake, hallucinated
  for (std::size_t i = 0; i < n; ++i) {
    const int patch = std::min(kLakePatches - 1, static_cast<int>(rng.uniform() * kLakePatches));
    const LakeView view = rng.uniform() < hidden_fraction ? LakeView::hidden_view() : LakeView::full(patch);
    // The hidden view's sample is drawn from the mixture, the truth is patch-specific.
    const Trajectory y = oracle.sample(view, rng);
    const auto s = oracle.score(view, y);
    const bool h = touches_cell(y, patch_cell(patch));
    const bool lake = touches_lake(y);
    conf.push_back({s.confidence, h});
    auto& cnt = counts[view_name(view)];
    ++cnt[0];
    cnt[1] += lake ? 1 : 0;
    cnt[2] += h ? 1 : 0;
    if (i < 2000)
      csv.rows.push_back({view_name(view), std::to_string(patch), fmt(s.p_marginal), fmt(s.confidence),
                          lake ? "1" : "0", h ? "1" : "0", trajectory_label(y)});
  }
  write_text(dir / "lake_samples.csv", csv.str());
  const auto cvh = confidence_vs_hallucination(conf, c["eval"]["confidence_bins"].get<std::size_t>());
  write_text(dir / "confidence_vs_hallucination.csv", confidence_csv(cvh).str());
  Json summary{{"task", "lake"}, {"samples", n}, {"worst_bin_excess", cvh.value}};
  for (const auto& [name, cnt] : counts)
    summary[name] = {{"samples", cnt[0]},
                     {"lake_touching_rate", static_cast<double>(cnt[1]) / static_cast<double>(cnt[0])},
                     {"hallucination_rate", static_cast<double>(cnt[2]) / static_cast<double>(cnt[0])}};
  write_json(dir / "eval_summary.json", summary);
}

// ---- decode -----------------------------------------------------------------

DecodePolicy decode_policy(const Json& c) {
  DecodePolicy p;
  p.kind = decode_kind_from_string(c["decode"]["kind"].get<std::string>());
  p.beta = c["decode"]["beta"].get<double>();
  p.mode = threshold_mode_from_string(c["decode"]["mode"].get<std::string>());
  p.max_attempts = c["decode"]["max_attempts"].get<std::size_t>();
  p.candidate_budget = c["decode"]["candidate_budget"].get<std::size_t>();
  return p;
}

struct DecodeTally {
  std::size_t queries = 0, accepted = 0, abstained = 0, exhausted = 0, hallucinated = 0, lake = 0;

  Json json() const {
    Json j{{"queries", queries}, {"accepted", accepted}, {"abstained", abstained}, {"exhausted", exhausted},
           {"hallucinated", hallucinated},
           {"hallucination_rate", accepted ? static_cast<double>(hallucinated) / static_cast<double>(accepted) : 0.0}};
    return j;
  }
  void count(Decision d) {
    ++queries;
    if (d == Decision::Accepted) ++accepted;
    else if (d == Decision::Abstain) ++abstained;
    else ++exhausted;
  }
};

void decode_pi(const Json& c) {
  const auto model = load_pi_model(c);
  const auto policy = decode_policy(c);
  Rng rng = substream(seed_of(c), kDecodeStream);
  const auto& candidates = PiPairModel::candidate_sentences();
  std::string lines;
  DecodeTally tally;
  for (std::size_t q = 0; q < c["decode"]["queries"].get<std::size_t>(); ++q) {
    const std::size_t offset = pi_query_sampler(rng);
    DecodableModel<std::string> m{[&](Rng& r) { return model.sample(offset, r); },
                                  [&](const std::string& y) { return model.score(offset, y); },
                                  [](const std::string& y) { return y; }};
    m = memoize_scores(std::move(m));
    const auto r = policy.kind == DecodeKind::Top1Search
                       ? top1_search(m, policy, std::span<const std::string>(candidates))
                       : decode(m, policy, rng);
    tally.count(r.decision);
    Json line{{"x", offset}, {"decision", to_string(r.decision)}, {"y", r.y ? Json(*r.y) : Json(nullptr)},
              {"confidence", r.score.confidence_is_finite() ? Json(r.score.confidence) : Json("inf")},
              {"attempts", r.attempts}};
    if (r.y && pi_is_hallucination(offset, *r.y)) ++tally.hallucinated;
    lines += line.dump() + "\n";
  }
  write_text(out_dir(c) / "decode.jsonl", lines);
  Json summary = tally.json();
  summary["policy"] = c["decode"];
  write_json(out_dir(c) / "decode_summary.json", summary);
}

void decode_lake(const Json& c) {
  require_model(c, "lake-view-mixture");
  const LakePairOracle oracle;
  const auto policy = decode_policy(c);
  const std::string view_mode = c["decode"]["view"].get<std::string>();
  Rng rng = substream(seed_of(c), kDecodeStream);
  std::string lines;
  DecodeTally tally;
  std::map<std::string, DecodableModel<Trajectory>> models;
  for (std::size_t q = 0; q < c["decode"]["queries"].get<std::size_t>(); ++q) {
    const int patch = std::min(kLakePatches - 1, static_cast<int>(rng.uniform() * kLakePatches));
    bool hidden = view_mode == "hidden";
    if (view_mode == "mixed") hidden = rng.uniform() < 0.5;
    const LakeView view = hidden ? LakeView::hidden_view() : LakeView::full(patch);
    const std::string key = hidden ? "hidden" : "full" + std::to_string(patch);
    if (!models.count(key))
      models[key] = memoize_scores(DecodableModel<Trajectory>{
          [&oracle, view](Rng& r) { return oracle.sample(view, r); },
          [&oracle, view](const Trajectory& y) { return oracle.score(view, y); },
          [](const Trajectory& y) { return trajectory_label(y); }});
    const auto r = decode(models[key], policy, rng);
    tally.count(r.decision);
    if (r.y && touches_cell(*r.y, patch_cell(patch))) ++tally.hallucinated;
    if (r.y && touches_lake(*r.y)) ++tally.lake;
    Json x{{"hidden", hidden}, {"patch", hidden ? Json(nullptr) : Json(patch)}};
    Json line{{"x", x}, {"decision", to_string(r.decision)}, {"y", r.y ? Json(trajectory_label(*r.y)) : Json(nullptr)},
              {"confidence", r.score.confidence_is_finite() ? Json(r.score.confidence) : Json("inf")},
              {"attempts", r.attempts}};
    lines += line.dump() + "\n";
  }
  write_text(out_dir(c) / "decode.jsonl", lines);
  Json summary = tally.json();
  summary["lake_touching"] = tally.lake;
  summary["policy"] = c["decode"];
  write_json(out_dir(c) / "decode_summary.json", summary);
}

// ---- report -----------------------------------------------------------------

std::vector<std::pair<double, double>> column_pairs(const Csv& csv, const std::string& xs, const std::string& ys,
                                                    const std::string& filter_col = "",
                                                    const std::string& filter_val = "") {
  auto idx = [&](const std::string& name) {
    const auto it = std::find(csv.header.begin(), csv.header.end(), name);
    require(it != csv.header.end(), ErrorCode::IoFailure, "CSV column '" + name + "' missing");
    return static_cast<std::size_t>(it - csv.header.begin());
  };
  const std::size_t xi = idx(xs), yi = idx(ys);
  const std::size_t fi = filter_col.empty() ? 0 : idx(filter_col);
  std::vector<std::pair<double, double>> out;
  for (const auto& r : csv.rows) {
    if (!filter_col.empty() && r.at(fi) != filter_val) continue;
    out.emplace_back(std::stod(r.at(xi)), std::stod(r.at(yi)));
  }
  return out;
}

}  // namespace

void gen_data(const Json& c) {
  with_metadata(c, "gen-data", [&] {
    const auto file = generate_dataset(task_of(c), c["data"]["n"].get<std::size_t>(), seed_of(c),
                                       c["data"]["hidden_fraction"].get<double>());
    write_dataset((out_dir(c) / "data.jsonl").string(), file);
  });
}

void train(const Json& c) {
  with_metadata(c, "train", [&] {
    switch (task_of(c)) {
      case TaskId::Sin1d: train_sin1d(c); break;
      case TaskId::Pi: train_pi(c); break;
      case TaskId::Lake: train_lake(c); break;
    }
  });
}

void eval(const Json& c) {
  with_metadata(c, "eval", [&] {
    switch (task_of(c)) {
      case TaskId::Sin1d: eval_sin1d(c); break;
      case TaskId::Pi: eval_pi(c); break;
      case TaskId::Lake: eval_lake(c); break;
    }
  });
}

void bound(const Json& c) {
  require(task_of(c) == TaskId::Sin1d, ErrorCode::ConfigInvalid, "bound needs a binary task (sin1d)");
  with_metadata(c, "bound", [&] {
    const auto models = load_sin1d_models(c);
    const double eps = c["bound"]["epsilon"].get<double>();
    const double alpha = c["bound"]["alpha"].get<double>();
    const CalibrationSet<double> calib(
        sin1d_dataset(c["bound"]["n"].get<std::size_t>(), derived_seed(c, kBoundStream)));
    const BinaryBatchPredictor<double> predictor = [&](std::span<const double> xs) {
      return models.pair.predict_binary(xs);
    };
    const auto report = adjust(calib, predictor, eps, alpha);
    const auto xs = sin1d_inputs(c["eval"]["test_n"].get<std::size_t>(), seed_of(c), kEvalStream);
    const auto pred = models.pair.predict_binary(xs);
    Csv cov{{"beta", "failure_rate_adjusted", "mean_width_adjusted"}, {}};
    for (double beta : beta_grid(c)) {
      std::size_t bad = 0;
      double width = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto iv = adjusted_interval(pred[i].p_hat, pred[i].v_hat, report, beta);
        bad += iv.contains(sin1d_prob(xs[i])) ? 0 : 1;
        width += iv.width();
      }
      cov.rows.push_back({fmt(beta), fmt(static_cast<double>(bad) / static_cast<double>(xs.size())),
                          fmt(width / static_cast<double>(xs.size()))});
    }
    const fs::path dir = out_dir(c) / "eval";
    write_text(dir / "adjusted_coverage_vs_beta.csv", cov.str());
    write_json(dir / "bound.json", Json{{"gamma_plus", report.gamma_plus},
                                        {"mean_s", report.mean_s},
                                        {"margin", report.margin},
                                        {"epsilon", report.epsilon},
                                        {"alpha", report.alpha},
                                        {"n", report.n},
                                        {"method", report.method}});
  });
}

void decode(const Json& c) {
  with_metadata(c, "decode", [&] {
    switch (task_of(c)) {
      case TaskId::Pi: decode_pi(c); break;
      case TaskId::Lake: decode_lake(c); break;
      case TaskId::Sin1d: fail(ErrorCode::ConfigInvalid, "decode needs a generative task (pi or lake)");
    }
  });
}

void report(const Json& c) {
  const fs::path dir = out_dir(c) / "eval";
  const fs::path rep = out_dir(c) / "report";
  auto has = [&](const char* name) { return fs::exists(dir / name); };
  const bool any = has("variance_profile.csv") || has("coverage_vs_beta.csv") ||
                   has("confidence_vs_hallucination.csv") || has("ranking_curves.csv") ||
                   has("adjusted_coverage_vs_beta.csv");
  require(any, ErrorCode::MissingArtifact, "no evaluation CSVs in " + dir.string() + " (run eval first)");
  with_metadata(c, "report", [&] {
    Json written = Json::array();
    auto emit = [&](const std::string& name, const cli::Chart& chart) {
      write_text(rep / name, render_svg(chart));
      written.push_back(name);
    };
    if (has("variance_profile.csv")) {
      const Csv csv = parse_csv(read_text(dir / "variance_profile.csv"));
      Chart ch{"Variance profile", "x", "variance", {}};
      ch.series.push_back({"cheat-corrected V", column_pairs(csv, "x", "v_cheat")});
      ch.series.push_back({"(p_hat - p)^2", column_pairs(csv, "x", "sq_err")});
      ch.series.push_back({"naive p(1-p)", column_pairs(csv, "x", "naive_var"), true});
      if (std::find(csv.header.begin(), csv.header.end(), "ensemble_var") != csv.header.end())
        ch.series.push_back({"ensemble", column_pairs(csv, "x", "ensemble_var"), true});
      emit("variance_profile.svg", ch);
    }
    if (has("coverage_vs_beta.csv") || has("adjusted_coverage_vs_beta.csv")) {
      Chart ch{"Coverage failures vs beta", "beta", "failure rate", {}};
      std::vector<std::pair<double, double>> diag;
      if (has("coverage_vs_beta.csv")) {
        const Csv csv = parse_csv(read_text(dir / "coverage_vs_beta.csv"));
        ch.series.push_back({"Chebyshev (model V)", column_pairs(csv, "beta", "failure_rate_cheat")});
        diag = column_pairs(csv, "beta", "beta");
      }
      if (has("adjusted_coverage_vs_beta.csv")) {
        const Csv csv = parse_csv(read_text(dir / "adjusted_coverage_vs_beta.csv"));
        ch.series.push_back({"adjusted (gamma+)", column_pairs(csv, "beta", "failure_rate_adjusted")});
        diag = column_pairs(csv, "beta", "beta");
      }
      ch.series.push_back({"y = beta", diag, true});
      emit("coverage_vs_beta.svg", ch);
    }
    if (has("confidence_vs_hallucination.csv")) {
      const Csv csv = parse_csv(read_text(dir / "confidence_vs_hallucination.csv"));
      Chart ch{"Hallucination rate vs confidence", "confidence C", "hallucination rate", {}};
      std::vector<std::pair<double, double>> pts, bound;
      for (const auto& [conf, rate] : column_pairs(csv, "mean_confidence", "hallucination_rate")) {
        if (conf <= 0.0 && rate <= 0.0) continue;  // empty bin
        pts.emplace_back(conf, rate);
      }
      for (int i = 0; i <= 10; ++i) bound.emplace_back(i / 10.0, 1.0 - i / 10.0);
      ch.series.push_back({"observed", pts});
      ch.series.push_back({"1 - C", bound, true});
      emit("hallucination_vs_confidence.svg", ch);
    }
    if (has("ranking_curves.csv")) {
      const Csv csv = parse_csv(read_text(dir / "ranking_curves.csv"));
      Chart ch{"Ranking strategies", "response rate", "hallucination rate", {}};
      std::vector<std::string> names;
      for (const auto& r : csv.rows)
        if (std::find(names.begin(), names.end(), r.at(0)) == names.end()) names.push_back(r.at(0));
      for (const auto& n : names)
        ch.series.push_back({n, column_pairs(csv, "response_rate", "hallucination_rate", "strategy", n)});
      emit("ranking_curves.svg", ch);
    }
    if (fs::exists(out_dir(c) / "loss.csv")) {
      const Csv csv = parse_csv(read_text(out_dir(c) / "loss.csv"));
      emit("loss.svg", Chart{"Training loss", "step", "loss", {{"loss", column_pairs(csv, "step", "loss")}}});
    }
    write_json(rep / "report.json", Json{{"figures", written}});
  });
}

}  // namespace paircal::cli
