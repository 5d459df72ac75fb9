// subseg: unsupervised subword segmentation with unigram language models.
//
// Subcommands: train (EM+Prune or baseline local search), segment (Viterbi /
// n-best), sample (posterior sampling), eval (model cost, boundary P/R/F,
// error analysis), inspect (model summary).

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "subseg/subseg.hpp"

namespace {

using namespace subseg;

std::set<char32_t> parse_charset(const std::string& utf8) {
  std::set<char32_t> out;
  for (char32_t c : decode_utf8(utf8)) out.insert(c);
  return out;
}

Dampening parse_dampening(const std::string& s) {
  if (s == "none") return Dampening::none;
  if (s == "log") return Dampening::log;
  if (s == "ones") return Dampening::ones;
  throw ValidationError("unknown dampening: " + s);
}

PriorVariant parse_prior(const std::string& s) {
  if (s == "full") return PriorVariant::full;
  if (s == "noexppsi") return PriorVariant::noexp_psi;
  if (s == "nofreqdistr") return PriorVariant::nofreqdistr;
  if (s == "noprior") return PriorVariant::noprior;
  throw ValidationError("unknown prior variant: " + s);
}

EmVariant parse_em(const std::string& s) {
  if (s == "em") return EmVariant::em;
  if (s == "lateen") return EmVariant::lateen;
  if (s == "viterbi-prune") return EmVariant::viterbi_prune;
  throw ValidationError("unknown EM variant: " + s);
}

PruneCriterion parse_criterion(const std::string& s) {
  if (s == "mdl") return PruneCriterion::mdl;
  if (s == "autotune") return PruneCriterion::autotune;
  if (s == "size") return PruneCriterion::lexicon_size;
  throw ValidationError("unknown criterion: " + s);
}

struct TrainFlags {
  std::string config;
  std::string input, output, history, dump_seed_path;
  std::string method = "emprune";
  std::string criterion = "mdl";
  std::string prior = "full";
  std::string em = "em";
  std::string dampening = "ones";
  std::string forcesplit_before, forcesplit_after;
  std::string preset;
  double alpha = 0.0;  // 0 = unset
  long long lexicon_size = 0;
  long long seed_size = 1000000;
  int max_substring_len = 20;
  bool no_prepruning = false;
  int sub_iterations = 0;  // 0 = per-method default
  double quota = 0.2;
  int max_rounds = 0;  // 0 = per-method default
  double stop_threshold = -1.0;  // <0 = per-method default
  std::uint64_t rng_seed = 0;
  int threads = 0;  // 0 = hardware
};

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open file for writing: " + path);
  out << content;
  if (!out) throw Error("failed writing: " + path);
}

std::string strip(const std::string& s) {
  const size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

// Flat `key = value` config layer with `#` comments. Values apply only to
// options the command line did not set: flags win over the file.
void apply_config_file(CLI::App& cmd, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open config file: " + path);
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = strip(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(lineno) + " is not key = value");
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    if (key.empty()) throw ValidationError("empty key in config line " + std::to_string(lineno));
    CLI::Option* opt = cmd.get_option_no_throw("--" + key);
    if (!opt || key == "config")
      throw ValidationError("unknown config key: " + key);
    if (opt->count() > 0) continue;  // command line wins
    opt->add_result(value.empty() && opt->get_expected_min() == 0 ? "true" : value);
    opt->run_callback();
  }
}

int cmd_train(const TrainFlags& f) {
  if (f.input.empty()) throw ValidationError("--input is required");
  if (f.output.empty()) throw ValidationError("--output is required");
  const Dampening damp = parse_dampening(f.dampening);
  const int threads =
      f.threads > 0 ? f.threads : std::max(1u, std::thread::hardware_concurrency());

  // progress log: one CSV row per round on standard error
  bool header_done = false;
  const RoundCallback log_round = [&header_done](const RoundRecord& r) {
    if (!header_done) {
      std::cerr << TrainHistory::csv_header() << "\n";
      header_done = true;
    }
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%d,%lld,%.17g,%.17g,%.17g,%.17g,%lld\n", r.round,
                  r.lexicon_size, r.cost.prior_nats, r.cost.likelihood_nats,
                  r.cost.weighted_total, r.alpha, r.pruned);
    std::cerr << buf;
  };

  if (f.method == "emprune") {
    TrainConfig config;
    const bool sp_preset = f.preset == "sentencepiece";
    if (!f.preset.empty() && !sp_preset)
      throw ValidationError("unknown preset: " + f.preset);
    if (sp_preset) {
      if (f.lexicon_size < 1)
        throw ValidationError("--preset sentencepiece requires --lexicon-size");
      config = sentencepiece_preset(f.lexicon_size);
    } else {
      config.criterion = parse_criterion(f.criterion);
      config.prior.variant = parse_prior(f.prior);
      config.em_variant = parse_em(f.em);
      config.dampening = damp;
      config.target_size = f.lexicon_size;
      if (config.criterion == PruneCriterion::mdl && f.alpha == 0.0)
        throw ValidationError("--criterion mdl requires --alpha");
      if (f.alpha != 0.0) config.prior.alpha = f.alpha;
      config.seed.forcesplit.before = parse_charset(f.forcesplit_before);
      config.seed.forcesplit.after = parse_charset(f.forcesplit_after);
    }
    config.seed.max_seed_size = f.seed_size;
    config.seed.max_substring_len = f.max_substring_len;
    if (f.no_prepruning) config.seed.prepruning = false;
    if (f.sub_iterations > 0) config.sub_iterations = f.sub_iterations;
    config.pruning_quota = f.quota;
    if (f.max_rounds > 0) config.max_rounds = f.max_rounds;
    if (f.stop_threshold >= 0.0) config.stop_cost_rel_threshold = f.stop_threshold;
    config.rng_seed = f.rng_seed;
    config.threads = threads;
    config.validate();

    const WordCountTable data = read_word_counts(f.input, damp);
    if (!f.dump_seed_path.empty())
      dump_seed(WordCountTable::from_entries(data.entries(), config.dampening), config.seed,
                f.dump_seed_path);
    auto [model, history] = train(data, config);
    write_model(model, f.output);
    write_text_file(f.history.empty() ? f.output + ".history.csv" : f.history, history.to_csv());
    return 0;
  }

  if (f.method == "baseline") {
    if (!f.dump_seed_path.empty())
      throw ValidationError("--dump-seed applies to --method emprune only");
    BaselineConfig config;
    config.prior.variant = parse_prior(f.prior);
    if (config.prior.variant == PriorVariant::noexp_psi)
      throw ValidationError("baseline has no EM step; prior noexppsi does not apply");
    if (f.alpha == 0.0) throw ValidationError("--method baseline requires --alpha");
    config.prior.alpha = f.alpha;
    config.dampening = damp;
    config.forcesplit.before = parse_charset(f.forcesplit_before);
    config.forcesplit.after = parse_charset(f.forcesplit_after);
    config.rng_seed = f.rng_seed;
    if (f.stop_threshold >= 0.0) config.convergence_threshold = f.stop_threshold;
    if (f.max_rounds > 0) config.max_epochs = f.max_rounds;
    config.validate();

    const WordCountTable data = read_word_counts(f.input, damp);
    BaselineResult result = train_baseline(data, config);
    write_model(result.model, f.output);
    write_text_file(f.history.empty() ? f.output + ".history.csv" : f.history,
                    result.history.to_csv());
    return 0;
  }
  throw ValidationError("unknown method: " + f.method);
}

std::vector<std::u32string> read_words(std::istream& in) {
  std::vector<std::u32string> words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
    if (line.empty()) continue;
    words.push_back(decode_utf8(line));
  }
  return words;
}

std::vector<std::u32string> read_input_words(const std::string& input_path) {
  if (input_path.empty()) return read_words(std::cin);
  std::ifstream in(input_path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + input_path);
  return read_words(in);
}

std::string join_morphs(const std::vector<std::u32string>& morphs, const std::string& marker,
                        const std::string& boundary_marker) {
  std::string out;
  for (size_t i = 0; i < morphs.size(); ++i) {
    out += encode_utf8(morphs[i]);
    if (i + 1 < morphs.size()) {
      out += boundary_marker;
      out += marker;
    }
  }
  return out;
}

int cmd_segment(const std::string& model_path, const std::string& input_path, int n_best,
                const std::string& marker, const std::string& boundary_marker) {
  const UnigramModel model = read_model(model_path);
  const auto words = read_input_words(input_path);
  char buf[64];
  for (const auto& word : words) {
    bool had_oov = false;
    if (n_best <= 1) {
      const Segmentation seg = segment_word(model, word, &had_oov);
      std::cout << join_morphs(seg.morphs, marker, boundary_marker) << '\n';
    } else {
      const auto segs = nbest_word(model, word, n_best, &had_oov);
      for (size_t i = 0; i < segs.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.6f", segs[i].logprob);
        std::cout << (i ? "\t" : "") << buf << ':'
                  << join_morphs(segs[i].morphs, marker, boundary_marker);
      }
      std::cout << '\n';
    }
    if (had_oov)
      std::cerr << "warning: OOV code points in \"" << encode_utf8(word)
                << "\"; emitted as single-character morphs\n";
  }
  return 0;
}

int cmd_sample(const std::string& model_path, const std::string& input_path,
               std::uint64_t rng_seed, int n_samples, const std::string& marker,
               const std::string& boundary_marker) {
  const UnigramModel model = read_model(model_path);
  const auto words = read_input_words(input_path);
  std::mt19937_64 rng(rng_seed);
  for (const auto& word : words) {
    for (int s = 0; s < n_samples; ++s) {
      bool had_oov = false;
      const Segmentation seg = sample_word(model, word, rng, &had_oov);
      std::cout << join_morphs(seg.morphs, marker, boundary_marker) << '\n';
      if (had_oov && s == 0)
        std::cerr << "warning: OOV code points in \"" << encode_utf8(word) << "\"\n";
    }
  }
  return 0;
}

std::string format_cost_csv(const CostBreakdown& cost) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "prior,likelihood,weighted,alpha\n%.17g,%.17g,%.17g,%.17g\n",
                cost.prior_nats, cost.likelihood_nats, cost.weighted_total, cost.alpha);
  return buf;
}

int cmd_eval(const std::string& mode, const std::string& input, const std::string& segmentation,
             const std::string& hypothesis, const std::string& gold_path,
             const std::string& dampening, const std::string& prior, double alpha,
             const std::string& csv_path) {
  std::string csv;
  if (mode == "cost") {
    if (input.empty() || segmentation.empty())
      throw ValidationError("--mode cost requires --input and --segmentation");
    PriorConfig pc;
    pc.variant = parse_prior(prior);
    pc.alpha = alpha != 0.0 ? alpha : 1.0;
    pc.validate();
    const WordCountTable data = read_word_counts(input, parse_dampening(dampening));
    const SegmentedCorpus seg = read_segmentation(segmentation);
    const CostBreakdown cost = evaluate_cost(seg, data, pc);
    std::printf("%-12s %16s %16s %16s\n", "", "Prior", "Likelihood", "W-sum");
    std::printf("%-12s %16.6g %16.6g %16.6g\n", "cost(nats)", cost.prior_nats,
                cost.likelihood_nats, cost.weighted_total);
    csv = format_cost_csv(cost);
  } else if (mode == "bpr") {
    if (hypothesis.empty() || gold_path.empty())
      throw ValidationError("--mode bpr requires --hypothesis and --gold");
    const SegmentedCorpus hyp = read_segmentation(hypothesis);
    const GoldStandard gold = read_gold_standard(gold_path);
    const BPRResult r = boundary_prf(hyp, gold);
    std::printf("%8s %8s %8s\n", "Pre", "Rec", "F");
    std::printf("%8.2f %8.2f %8.2f\n", 100.0 * r.precision, 100.0 * r.recall, 100.0 * r.f1);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "Pre,Rec,F\n%.17g,%.17g,%.17g\n", 100.0 * r.precision,
                  100.0 * r.recall, 100.0 * r.f1);
    csv = buf;
  } else if (mode == "errors") {
    if (hypothesis.empty() || gold_path.empty())
      throw ValidationError("--mode errors requires --hypothesis and --gold");
    const SegmentedCorpus hyp = read_segmentation(hypothesis);
    const GoldStandard gold = read_gold_standard(gold_path);
    const ErrorProfile p = error_analysis(hyp, gold);
    const std::vector<std::string> over_keys = {"STM", "SUF", "PRE", "UNKNOWN"};
    const std::vector<std::string> under_keys = {"STM-SUF", "STM-STM", "SUF-SUF",
                                                 "SUF-STM", "PRE-STM", "UNKNOWN"};
    std::printf("Over-segmentation (%% of assigned boundaries)\n");
    for (const auto& k : over_keys) std::printf("%10s", k.c_str());
    std::printf("%10s\n", "PRE/TOT");
    for (const auto& k : over_keys) std::printf("%10.2f", p.over_share(k));
    std::printf("%10.2f\n", p.precision_proxy());
    std::printf("Under-segmentation (%% of reference boundaries)\n");
    for (const auto& k : under_keys) std::printf("%10s", k.c_str());
    std::printf("%10s\n", "REC/TOT");
    for (const auto& k : under_keys) std::printf("%10.2f", p.under_share(k));
    std::printf("%10.2f\n", p.recall_proxy());

    std::ostringstream os;
    char buf[64];
    for (const auto& k : over_keys) os << "over_" << k << ',';
    os << "PRE/TOT,";
    for (const auto& k : under_keys) os << "under_" << k << ',';
    os << "REC/TOT\n";
    for (const auto& k : over_keys) {
      std::snprintf(buf, sizeof(buf), "%.17g,", p.over_share(k));
      os << buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g,", p.precision_proxy());
    os << buf;
    for (const auto& k : under_keys) {
      std::snprintf(buf, sizeof(buf), "%.17g,", p.under_share(k));
      os << buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g\n", p.recall_proxy());
    os << buf;
    csv = os.str();
  } else {
    throw ValidationError("unknown eval mode: " + mode);
  }
  if (!csv_path.empty()) write_text_file(csv_path, csv);
  return 0;
}

int cmd_inspect(const std::string& model_path, int top) {
  const UnigramModel model = read_model(model_path);
  const SubwordLexicon& lex = model.lexicon();
  std::printf("lexicon size:    %d\n", lex.size());
  std::printf("protected:       %d\n", lex.protected_count());
  std::printf("max length:      %d\n", lex.max_len());
  std::printf("total prob mass: %.6f\n", model.total_mass());
  std::printf("min logprob:     %.6f\n", model.min_logprob());
  std::vector<std::int32_t> ids(lex.size());
  for (std::int32_t i = 0; i < lex.size(); ++i) ids[i] = i;
  std::sort(ids.begin(), ids.end(), [&](std::int32_t a, std::int32_t b) {
    if (model.logprob(a) != model.logprob(b)) return model.logprob(a) > model.logprob(b);
    return lex.at(a) < lex.at(b);
  });
  std::printf("top entries:\n");
  for (int i = 0; i < std::min<int>(top, lex.size()); ++i)
    std::printf("  %12.6f  %s\n", model.logprob(ids[i]), encode_utf8(lex.at(ids[i])).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"unsupervised subword segmentation with unigram language models"};
  app.require_subcommand(1);

  // train
  TrainFlags tf;
  auto* train_cmd = app.add_subcommand("train", "train a segmentation model from word counts");
  train_cmd->add_option("--config", tf.config,
                        "flat key = value config file; explicit flags win");
  train_cmd->add_option("--input", tf.input, "word count file: <count><TAB><word> (required)");
  train_cmd->add_option("--output", tf.output, "model file to write (required)");
  train_cmd->add_option("--history", tf.history,
                        "training history CSV (default: <output>.history.csv)");
  train_cmd->add_option("--method", tf.method, "emprune|baseline")
      ->check(CLI::IsMember({"emprune", "baseline"}));
  train_cmd->add_option("--criterion", tf.criterion, "pruning criterion: mdl|autotune|size")
      ->check(CLI::IsMember({"mdl", "autotune", "size"}));
  train_cmd->add_option("--alpha", tf.alpha, "likelihood weight");
  train_cmd->add_option("--lexicon-size", tf.lexicon_size,
                        "target lexicon size (autotune/size criteria)");
  train_cmd->add_option("--prior", tf.prior, "full|noexppsi|nofreqdistr|noprior")
      ->check(CLI::IsMember({"full", "noexppsi", "nofreqdistr", "noprior"}));
  train_cmd->add_option("--em", tf.em, "EM variant: em|lateen|viterbi-prune")
      ->check(CLI::IsMember({"em", "lateen", "viterbi-prune"}));
  train_cmd->add_option("--dampening", tf.dampening, "count dampening: none|log|ones")
      ->check(CLI::IsMember({"none", "log", "ones"}));
  train_cmd->add_option("--forcesplit-before", tf.forcesplit_before,
                        "characters that force a split before them");
  train_cmd->add_option("--forcesplit-after", tf.forcesplit_after,
                        "characters that force a split after them");
  train_cmd->add_option("--preset", tf.preset, "configuration preset: sentencepiece");
  train_cmd->add_option("--seed-size", tf.seed_size, "maximum seed lexicon size");
  train_cmd->add_option("--max-substring-len", tf.max_substring_len,
                        "maximum seed substring length in code points");
  train_cmd->add_flag("--no-prepruning", tf.no_prepruning,
                      "disable redundant-substring pre-pruning of the seed");
  train_cmd->add_option("--dump-seed", tf.dump_seed_path,
                        "write the seed lexicon as <count><TAB><substring> lines");
  train_cmd->add_option("--sub-iterations", tf.sub_iterations, "EM sub-iterations per round");
  train_cmd->add_option("--quota", tf.quota, "max fraction of the lexicon pruned per round");
  train_cmd->add_option("--max-rounds", tf.max_rounds, "maximum training rounds / epochs");
  train_cmd->add_option("--stop-threshold", tf.stop_threshold,
                        "relative cost-change stopping threshold");
  train_cmd->add_option("--rng-seed", tf.rng_seed, "random seed (baseline word order)");
  train_cmd->add_option("--threads", tf.threads, "E-step worker threads (default: cores)");

  // segment
  std::string seg_model, seg_input, seg_marker = " ", seg_bm;
  int seg_nbest = 1;
  auto* seg_cmd = app.add_subcommand("segment", "segment words (stdin or --input) with a model");
  seg_cmd->add_option("--model", seg_model, "model file")->required();
  seg_cmd->add_option("--input", seg_input, "word list file; default: standard input");
  seg_cmd->add_option("--nbest", seg_nbest, "emit the top N segmentations per word");
  seg_cmd->add_option("--marker", seg_marker, "separator between morphs (default: space)");
  seg_cmd->add_option("--boundary-marker", seg_bm,
                      "suffix appended to non-final morphs (e.g. @@ for MT pipelines)");

  // sample
  std::string sam_model, sam_input, sam_marker = " ", sam_bm;
  std::uint64_t sam_seed = 0;
  int sam_n = 1;
  auto* sam_cmd = app.add_subcommand("sample", "sample segmentations from the posterior");
  sam_cmd->add_option("--model", sam_model, "model file")->required();
  sam_cmd->add_option("--input", sam_input, "word list file; default: standard input");
  sam_cmd->add_option("--rng-seed", sam_seed, "random seed")->required();
  sam_cmd->add_option("--n", sam_n, "samples per word");
  sam_cmd->add_option("--marker", sam_marker, "separator between morphs");
  sam_cmd->add_option("--boundary-marker", sam_bm, "suffix appended to non-final morphs");

  // eval
  std::string ev_mode, ev_input, ev_seg, ev_hyp, ev_gold, ev_damp = "ones", ev_prior = "full",
              ev_csv;
  double ev_alpha = 0.0;
  auto* ev_cmd = app.add_subcommand("eval", "evaluate segmentations");
  ev_cmd->add_option("--mode", ev_mode, "cost|bpr|errors")
      ->required()
      ->check(CLI::IsMember({"cost", "bpr", "errors"}));
  ev_cmd->add_option("--input", ev_input, "training word counts (cost mode)");
  ev_cmd->add_option("--segmentation", ev_seg, "segmentation of the training corpus (cost mode)");
  ev_cmd->add_option("--hypothesis", ev_hyp, "hypothesis segmentation (bpr/errors modes)");
  ev_cmd->add_option("--gold", ev_gold, "gold standard file (bpr/errors modes)");
  ev_cmd->add_option("--dampening", ev_damp, "count dampening for cost mode")
      ->check(CLI::IsMember({"none", "log", "ones"}));
  ev_cmd->add_option("--prior", ev_prior, "prior variant for cost mode")
      ->check(CLI::IsMember({"full", "noexppsi", "nofreqdistr", "noprior"}));
  ev_cmd->add_option("--alpha", ev_alpha, "likelihood weight for cost mode");
  ev_cmd->add_option("--csv", ev_csv, "also write the report as CSV");

  // inspect
  std::string in_model;
  int in_top = 10;
  auto* in_cmd = app.add_subcommand("inspect", "print a model summary");
  in_cmd->add_option("--model", in_model, "model file")->required();
  in_cmd->add_option("--top", in_top, "number of top entries to list");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (app.got_subcommand(train_cmd)) {
      if (!tf.config.empty()) apply_config_file(*train_cmd, tf.config);
      return cmd_train(tf);
    }
    if (app.got_subcommand(seg_cmd))
      return cmd_segment(seg_model, seg_input, seg_nbest, seg_marker, seg_bm);
    if (app.got_subcommand(sam_cmd))
      return cmd_sample(sam_model, sam_input, sam_seed, sam_n, sam_marker, sam_bm);
    if (app.got_subcommand(ev_cmd))
      return cmd_eval(ev_mode, ev_input, ev_seg, ev_hyp, ev_gold, ev_damp, ev_prior, ev_alpha,
                      ev_csv);
    if (app.got_subcommand(in_cmd)) return cmd_inspect(in_model, in_top);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
