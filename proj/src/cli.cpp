#include "parselab/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "parselab/biaff.hpp"
#include "parselab/config.hpp"
#include "parselab/dcst.hpp"
#include "parselab/evaluation.hpp"
#include "parselab/graph_parser.hpp"
#include "parselab/l2s.hpp"
#include "parselab/linear_model.hpp"
#include "parselab/transition.hpp"
#include "parselab/treebank.hpp"

namespace parselab::cli {

namespace {

using config::ExperimentConfig;

features::FeatureConfig feature_config_of(const ExperimentConfig& cfg) {
  features::FeatureConfig fcfg;
  fcfg.hash_bits = cfg.get_int("feature.hash_bits");
  fcfg.use_morph = cfg.get_bool("feature.use_morph");
  fcfg.free_word_order = cfg.get_bool("feature.free_word_order");
  return fcfg;
}

neural::BiaffConfig biaff_config_of(const ExperimentConfig& cfg) {
  neural::BiaffConfig bcfg;
  bcfg.dims.word_dim = cfg.get_int("biaff.word_dim");
  bcfg.dims.morph_dim = cfg.get_int("biaff.morph_dim");
  bcfg.dims.hidden = cfg.get_int("biaff.hidden");
  bcfg.dims.layers = cfg.get_int("biaff.layers");
  bcfg.dims.use_morph = cfg.get_bool("biaff.use_morph");
  bcfg.arc_dim = cfg.get_int("biaff.arc_dim");
  bcfg.label_dim = cfg.get_int("biaff.label_dim");
  bcfg.learning_rate = cfg.get_double("biaff.lr");
  bcfg.batch_size = cfg.get_int("biaff.batch_size");
  bcfg.epochs = cfg.get_int("biaff.epochs");
  bcfg.seed = cfg.seed();
  bcfg.fast_mode = cfg.get("biaff.mode") == "fast";
  bcfg.dropout = cfg.get_double("biaff.dropout");
  bcfg.unk_prob = cfg.get_double("biaff.unk_prob");
  bcfg.single_root = cfg.get_bool("biaff.single_root");
  return bcfg;
}

// Tee for "log to stdout and to the training log file".
struct TrainLog {
  std::ofstream file;
  explicit TrainLog(const std::string& path) {
    if (!path.empty()) {
      file.open(path);
      if (!file) throw UsageError("cannot open log file " + path);
    }
  }
  void line(const std::string& s) {
    std::cout << s << "\n";
    if (file.is_open()) file << s << "\n";
  }
};

// Ostream adapter feeding TrainLog line by line.
class LogBuf : public std::stringbuf {
 public:
  explicit LogBuf(TrainLog& log) : log_(log) {}
  int sync() override {
    std::string s = str();
    std::size_t start = 0;
    while (true) {
      std::size_t nl = s.find('\n', start);
      if (nl == std::string::npos) break;
      log_.line(s.substr(start, nl - start));
      start = nl + 1;
    }
    str(s.substr(start));
    return 0;
  }

 private:
  TrainLog& log_;
};

treebank::Corpus load_corpus(const std::string& path) { return treebank::read_conll_file(path); }

// First bytes decide the model family.
bool is_neural_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("cannot open " + path);
  char b[4];
  if (!is.read(b, 4)) throw ParseError("model file truncated: " + path);
  std::uint32_t magic = 0;
  for (int i = 0; i < 4; ++i) {
    magic |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
  }
  return magic == 0x504c4e4e;
}

struct TrainArgs {
  std::string parser, train_path, dev_path, model_path, config_path, log_path;
};

int cmd_train(const TrainArgs& args) {
  if (args.parser != "graph" && args.parser != "arceager" && args.parser != "l2s" &&
      args.parser != "biaff") {
    throw UsageError("unknown parser '" + args.parser + "' (graph|arceager|l2s|biaff)");
  }
  ExperimentConfig cfg = args.config_path.empty()
                             ? [] {
                                 ExperimentConfig c;
                                 c.apply_env_overrides();
                                 return c;
                               }()
                             : ExperimentConfig::from_file(args.config_path);
  TrainLog log(args.log_path.empty() ? args.model_path + ".log" : args.log_path);
  LogBuf buf(log);
  std::ostream log_stream(&buf);
  {
    std::istringstream dump(cfg.dump());
    std::string line;
    while (std::getline(dump, line)) log.line("config: " + line);
  }

  treebank::Corpus train = load_corpus(args.train_path);
  treebank::Corpus dev;
  bool have_dev = !args.dev_path.empty();
  if (have_dev) dev = load_corpus(args.dev_path);

  if (args.parser == "graph") {
    graph::MarginTrainOptions opts;
    opts.epochs = cfg.get_int("graph.epochs");
    opts.seed = cfg.seed();
    opts.decoder = cfg.get("graph.decoder") == "eisner" ? graph::Decoder::Eisner
                                                        : graph::Decoder::Cle;
    opts.loss = cfg.get("graph.loss") == "perceptron" ? graph::LossKind::Perceptron
                                                      : graph::LossKind::Margin;
    opts.single_root = cfg.get_bool("graph.single_root");
    opts.feature_config = feature_config_of(cfg);
    opts.dev = have_dev ? &dev : nullptr;
    opts.log = &log_stream;
    auto model = graph::train_margin(train, opts);
    log_stream.flush();
    model.save_file(args.model_path);
  } else if (args.parser == "arceager") {
    transition::EarlyUpdateOptions opts;
    opts.epochs = cfg.get_int("transition.epochs");
    opts.beam_width = cfg.get_int("transition.beam_width");
    opts.max_restarts = cfg.get_int("transition.max_restarts");
    opts.seed = cfg.seed();
    opts.nonprojective = cfg.get("transition.nonprojective") == "skip"
                             ? transition::NonProjectivePolicy::Skip
                             : transition::NonProjectivePolicy::Projectivize;
    opts.feature_config = feature_config_of(cfg);
    opts.dev = have_dev ? &dev : nullptr;
    opts.log = &log_stream;
    auto model = transition::train_early_update(train, transition::SystemId::ArcEager, opts);
    log_stream.flush();
    model.save_file(args.model_path);
  } else if (args.parser == "l2s") {
    l2s::L2sOptions opts;
    opts.passes = cfg.get_int("l2s.passes");
    opts.beta_decay = cfg.get_double("l2s.beta_decay");
    opts.deviation_fraction = cfg.get_double("l2s.deviation_fraction");
    const std::string roll = cfg.get("l2s.rollout");
    opts.rollout = roll == "learned" ? l2s::RolloutPolicy::Learned
                   : roll == "mixture" ? l2s::RolloutPolicy::Mixture
                                       : l2s::RolloutPolicy::Reference;
    opts.labeled_loss = cfg.get_bool("l2s.labeled_loss");
    opts.seed = cfg.seed();
    opts.nonprojective = cfg.get("transition.nonprojective") == "skip"
                             ? transition::NonProjectivePolicy::Skip
                             : transition::NonProjectivePolicy::Projectivize;
    opts.feature_config = feature_config_of(cfg);
    opts.dev = have_dev ? &dev : nullptr;
    opts.log = &log_stream;
    auto policy = l2s::train_l2s(train, opts);
    log_stream.flush();
    policy.model.save_file(args.model_path);
  } else if (args.parser == "biaff") {
    auto bcfg = biaff_config_of(cfg);
    auto model = neural::init_biaff(train, bcfg);
    neural::train_biaff(model, train, have_dev ? &dev : nullptr, &log_stream);
    log_stream.flush();
    model.save_file(args.model_path);
  } else {
    throw UsageError("unknown parser '" + args.parser + "' (graph|arceager|l2s|biaff)");
  }
  log.line("model written to " + args.model_path);
  return 0;
}

struct ParseArgs {
  std::string model_path, input_path, output_path;
  int beam = 0;  // 0 = model default
  int jobs = 1;
  std::string decoder = "cle";
};

int cmd_parse(const ParseArgs& args) {
  treebank::Corpus corpus = load_corpus(args.input_path);
  std::vector<treebank::DependencyTree> trees(corpus.size());

  auto parse_range = [&](auto&& parse_one) {
    const int jobs = std::max(1, args.jobs);
    if (jobs == 1 || corpus.size() < 2) {
      for (std::size_t i = 0; i < corpus.size(); ++i) trees[i] = parse_one(corpus.sentences[i]);
      return;
    }
    std::vector<std::thread> workers;
    std::size_t chunk = (corpus.size() + jobs - 1) / static_cast<std::size_t>(jobs);
    for (int j = 0; j < jobs; ++j) {
      std::size_t begin = static_cast<std::size_t>(j) * chunk;
      std::size_t end = std::min(corpus.size(), begin + chunk);
      if (begin >= end) break;
      workers.emplace_back([&, begin, end] {
        for (std::size_t i = begin; i < end; ++i) trees[i] = parse_one(corpus.sentences[i]);
      });
    }
    for (auto& w : workers) w.join();
  };

  if (is_neural_model(args.model_path)) {
    auto model = neural::BiaffModel::load_file(args.model_path);
    parse_range([&](const treebank::Sentence& s) { return neural::parse_biaff(model, s); });
  } else {
    auto model = linear::LinearModel::load_file(args.model_path);
    if (model.system_id() == 0) {
      graph::Decoder dec =
          args.decoder == "eisner" ? graph::Decoder::Eisner : graph::Decoder::Cle;
      parse_range([&](const treebank::Sentence& s) { return graph::parse_graph(model, s, dec); });
    } else {
      auto sys = static_cast<transition::SystemId>(model.system_id());
      const int width = args.beam > 0 ? args.beam : 8;
      parse_range([&](const treebank::Sentence& s) {
        return transition::beam_parse(model, sys, s, width);
      });
    }
  }
  corpus.predicted = std::move(trees);
  treebank::write_conll_file(args.output_path, corpus, treebank::TreeChannel::Predicted);
  return 0;
}

struct EvalArgs {
  std::string gold_path, pred_path, pred2_path, out_path;
};

eval::Trees prediction_trees(const treebank::Corpus& corpus) {
  return corpus.has_predictions() ? corpus.predicted : corpus.gold_trees();
}

int cmd_eval(const EvalArgs& args) {
  auto gold = load_corpus(args.gold_path).gold_trees();
  auto pred = prediction_trees(load_corpus(args.pred_path));
  auto micro = eval::micro_scores(gold, pred);
  auto macro = eval::macro_scores(gold, pred);
  std::ostringstream out;
  out << std::fixed << std::setprecision(6);
  out << "micro_uas " << micro.uas << "\nmicro_las " << micro.las << "\nmacro_uas " << macro.uas
      << "\nmacro_las " << macro.las << "\n";
  // Stability of the per-length score series (the bucketed MAD statistic).
  auto sentlen = eval::bucket_report(gold, pred, eval::Dimension::SentenceLength);
  if (!sentlen.empty()) {
    std::vector<double> uas_series, las_series;
    for (const auto& row : sentlen) {
      uas_series.push_back(row.p_unlab);
      las_series.push_back(row.p_lab);
    }
    out << "mad_sentlen_uas " << eval::mad(uas_series) << "\nmad_sentlen_las "
        << eval::mad(las_series) << "\n";
  }
  if (!args.pred2_path.empty()) {
    auto pred2 = prediction_trees(load_corpus(args.pred2_path));
    auto micro2 = eval::micro_scores(gold, pred2);
    out << "pred2_micro_uas " << micro2.uas << "\npred2_micro_las " << micro2.las << "\n";
    auto a = eval::sentence_scores(gold, pred);
    auto b = eval::sentence_scores(gold, pred2);
    std::vector<double> a_uas, b_uas, a_las, b_las;
    for (std::size_t i = 0; i < a.size(); ++i) {
      a_uas.push_back(a[i].uas);
      b_uas.push_back(b[i].uas);
      a_las.push_back(a[i].las);
      b_las.push_back(b[i].las);
    }
    auto t_uas = eval::paired_t_test(a_uas, b_uas);
    auto t_las = eval::paired_t_test(a_las, b_las);
    out << "t_uas " << t_uas.t << "\np_uas " << t_uas.p << "\nt_las " << t_las.t << "\np_las "
        << t_las.p << "\n";
    if (t_uas.degenerate || t_las.degenerate) out << "t_test_degenerate 1\n";
  }
  std::cout << out.str();
  if (!args.out_path.empty()) {
    std::ofstream os(args.out_path);
    if (!os) throw ParseError("cannot open " + args.out_path + " for writing");
    os << out.str();
  }
  return 0;
}

struct ProfileArgs {
  std::string gold_path, pred_path, by, out_path;
  int min_support = 0;
  std::string config_path;
};

int cmd_profile(const ProfileArgs& args) {
  ExperimentConfig cfg = args.config_path.empty() ? ExperimentConfig()
                                                  : ExperimentConfig::from_file(args.config_path);
  if (!args.config_path.empty()) {
    std::istringstream dump(cfg.dump());
    std::string line;
    while (std::getline(dump, line)) std::cerr << "config: " << line << "\n";
  }
  auto gold = load_corpus(args.gold_path).gold_trees();
  auto pred = prediction_trees(load_corpus(args.pred_path));
  eval::BucketOptions opts;
  opts.min_support = args.min_support;
  opts.deplen_max = cfg.get_int("eval.deplen_max");
  opts.nonproj_max = cfg.get_int("eval.nonproj_max");
  opts.rootdist_max = cfg.get_int("eval.rootdist_max");
  auto rows = eval::bucket_report(gold, pred, eval::dimension_from_name(args.by), opts);
  if (args.out_path.empty()) {
    eval::write_bucket_csv(std::cout, rows);
  } else {
    std::ofstream os(args.out_path);
    if (!os) throw ParseError("cannot open " + args.out_path + " for writing");
    eval::write_bucket_csv(os, rows);
  }
  return 0;
}

struct SelftrainArgs {
  std::string labeled_path, unlabeled_path, model_path, config_path, tasks, autolabel_path,
      log_path;
  bool freeze_aux = true;
  bool freeze_aux_given = false;
};

int cmd_selftrain(const SelftrainArgs& args) {
  ExperimentConfig cfg = args.config_path.empty()
                             ? [] {
                                 ExperimentConfig c;
                                 c.apply_env_overrides();
                                 return c;
                               }()
                             : ExperimentConfig::from_file(args.config_path);
  TrainLog log(args.log_path.empty() ? args.model_path + ".log" : args.log_path);
  LogBuf buf(log);
  std::ostream log_stream(&buf);
  {
    std::istringstream dump(cfg.dump());
    std::string line;
    while (std::getline(dump, line)) log.line("config: " + line);
  }

  dcst::SelfTrainOptions opts;
  opts.biaff = biaff_config_of(cfg);
  opts.freeze_aux = args.freeze_aux_given ? args.freeze_aux : cfg.get_bool("dcst.freeze_aux");
  opts.tagger.learning_rate = cfg.get_double("biaff.lr");
  opts.tagger.batch_size = cfg.get_int("biaff.batch_size");
  opts.tagger.max_epochs = cfg.get_int("dcst.tagger_epochs");
  opts.tagger.patience = cfg.get_int("dcst.tagger_patience");
  opts.tagger.dev_fraction = cfg.get_double("dcst.dev_fraction");
  opts.tagger.seed = cfg.seed();
  opts.autolabel_path =
      args.autolabel_path.empty() ? args.model_path + ".autolabel.conll" : args.autolabel_path;
  if (!args.tasks.empty()) {
    opts.tasks.clear();
    std::istringstream ss(args.tasks);
    std::string item;
    while (std::getline(ss, item, ',')) opts.tasks.push_back(dcst::aux_task_from_name(item));
  }

  treebank::Corpus labeled = load_corpus(args.labeled_path);
  treebank::Corpus unlabeled = load_corpus(args.unlabeled_path);
  auto model = dcst::self_train(labeled, unlabeled, opts, &log_stream);
  log_stream.flush();
  model.save_file(args.model_path);
  log.line("model written to " + args.model_path);
  return 0;
}

struct PermuteArgs {
  std::string input_path, out_path, mode = "shuffle";
  std::uint64_t seed = 1;
};

int cmd_permute(const PermuteArgs& args) {
  treebank::Corpus corpus = load_corpus(args.input_path);
  const auto mode = args.mode == "identity" ? treebank::PermuteMode::Identity
                                            : treebank::PermuteMode::SeededShuffle;
  treebank::Corpus out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    out.sentences.push_back(
        treebank::permute_words(corpus.sentences[i], mode, args.seed + i));
  }
  treebank::write_conll_file(args.out_path, out, treebank::TreeChannel::Gold);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"parselab: dependency parsing laboratory", "parselab"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "train a parser");
  train->add_option("--parser", train_args.parser, "graph|arceager|l2s|biaff")->required();
  train->add_option("--train", train_args.train_path, "training CoNLL file")->required();
  train->add_option("--dev", train_args.dev_path, "development CoNLL file");
  train->add_option("--model", train_args.model_path, "output model file")->required();
  train->add_option("--config", train_args.config_path, "experiment config file");
  train->add_option("--log", train_args.log_path, "training log file");

  ParseArgs parse_args;
  auto* parse = app.add_subcommand("parse", "parse a corpus with a trained model");
  parse->add_option("--model", parse_args.model_path)->required();
  parse->add_option("--input", parse_args.input_path)->required();
  parse->add_option("--output", parse_args.output_path)->required();
  parse->add_option("--beam", parse_args.beam, "beam width for transition models");
  parse->add_option("--jobs", parse_args.jobs, "parallel workers");
  parse->add_option("--decoder", parse_args.decoder, "cle|eisner for graph models");

  EvalArgs eval_args;
  auto* evalc = app.add_subcommand("eval", "micro/macro UAS and LAS");
  evalc->add_option("--gold", eval_args.gold_path)->required();
  evalc->add_option("--pred", eval_args.pred_path)->required();
  evalc->add_option("--pred2", eval_args.pred2_path,
                    "second system for paired significance tests");
  evalc->add_option("--out", eval_args.out_path);

  ProfileArgs profile_args;
  auto* profile = app.add_subcommand("profile", "bucketed error profile CSV");
  profile->add_option("--gold", profile_args.gold_path)->required();
  profile->add_option("--pred", profile_args.pred_path)->required();
  profile->add_option("--by", profile_args.by, "sentlen|deplen|nonproj|rootdist")->required();
  profile->add_option("--min-support", profile_args.min_support);
  profile->add_option("--out", profile_args.out_path);
  profile->add_option("--config", profile_args.config_path);

  SelftrainArgs selftrain_args;
  auto* selftrain = app.add_subcommand("selftrain", "DCST self-training pipeline");
  selftrain->add_option("--labeled", selftrain_args.labeled_path)->required();
  selftrain->add_option("--unlabeled", selftrain_args.unlabeled_path)->required();
  selftrain->add_option("--model", selftrain_args.model_path)->required();
  selftrain->add_option("--tasks", selftrain_args.tasks, "children,rootdist,relpos");
  auto* freeze_flag = selftrain->add_flag("--freeze-aux,!--no-freeze-aux",
                                          selftrain_args.freeze_aux,
                                          "freeze (or fine-tune) the auxiliary encoders");
  selftrain->add_option("--config", selftrain_args.config_path);
  selftrain->add_option("--autolabel", selftrain_args.autolabel_path,
                        "where to write auto-labeled trees");
  selftrain->add_option("--log", selftrain_args.log_path);

  PermuteArgs permute_args;
  auto* permute = app.add_subcommand("permute", "word-order permutation ablation");
  permute->add_option("--input", permute_args.input_path)->required();
  permute->add_option("--seed", permute_args.seed)->required();
  permute->add_option("--out", permute_args.out_path)->required();
  permute->add_option("--mode", permute_args.mode, "identity|shuffle");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  selftrain_args.freeze_aux_given = freeze_flag->count() > 0;

  try {
    if (*train) return cmd_train(train_args);
    if (*parse) return cmd_parse(parse_args);
    if (*evalc) return cmd_eval(eval_args);
    if (*profile) return cmd_profile(profile_args);
    if (*selftrain) return cmd_selftrain(selftrain_args);
    if (*permute) return cmd_permute(permute_args);
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace parselab::cli
