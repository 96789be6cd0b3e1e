// src/cli/cli.cc

// Copyright 2026   The blspk Authors

// See the LICENSE file at the repository root
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "blspk/cli/cli.h"

#include <zlib.h>

#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>

#include "CLI11.hpp"
#include "blspk/corpus.h"
#include "blspk/dsp/audio.h"
#include "blspk/dsp/features.h"
#include "blspk/embed/embedding.h"
#include "blspk/error.h"
#include "blspk/eval/harness.h"
#include "blspk/eval/synth.h"
#include "blspk/eval/trials.h"
#include "blspk/identify/speaker_db.h"
#include "blspk/net/trainer.h"
#include "blspk/net/weights_io.h"
#include "blspk/service/service.h"

namespace blspk {

namespace {

namespace fs = std::filesystem;

// Raised for problems CLI11 cannot see, such as a missing --weights.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  std::string weights;
  std::string db;
  std::uint64_t seed = 0;
  double crop = 0.5;
};

// Where a command gets its audio: a corpus directory or a synthetic corpus
// generated from --seed.
struct CorpusOptions {
  std::string dir;
  int synth_speakers = 0;
  int utterances = 20;
  int first_utt = 0;
  int last_utt = 0;  // exclusive; 0 means all
};

void AddCorpusOptions(CLI::App *cmd, CorpusOptions *o, bool positional) {
  if (positional) {
    cmd->add_option("corpus", o->dir, "Corpus directory (one subdirectory per speaker)");
  } else {
    cmd->add_option("--corpus", o->dir, "Corpus directory (one subdirectory per speaker)");
  }
  cmd->add_option("--synth", o->synth_speakers,
                  "Use a synthetic corpus with this many speakers")
      ->check(CLI::Range(2, 1000));
  cmd->add_option("--utterances", o->utterances,
                  "Utterances per synthetic speaker")
      ->check(CLI::Range(1, 10000));
  cmd->add_option("--first-utt", o->first_utt,
                  "Use utterances from this index on")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--last-utt", o->last_utt,
                  "Use utterances before this index (0: all)")
      ->check(CLI::NonNegativeNumber);
}

Corpus ResolveCorpus(const CorpusOptions &o, std::uint64_t seed) {
  if (o.dir.empty() == (o.synth_speakers == 0)) {
    throw UsageError("give exactly one of a corpus directory or --synth");
  }
  Corpus corpus = o.dir.empty()
                      ? MakeSynthCorpus(o.synth_speakers, o.utterances, seed).corpus
                      : LoadCorpusDir(o.dir);
  if (o.first_utt == 0 && o.last_utt == 0) return corpus;
  for (auto &s : corpus.speakers) {
    const std::size_t end =
        o.last_utt == 0 ? s.utterances.size()
                        : std::min<std::size_t>(o.last_utt, s.utterances.size());
    const std::size_t begin = std::min<std::size_t>(o.first_utt, end);
    s.utterances = std::vector<AudioSegment>(s.utterances.begin() + begin,
                                             s.utterances.begin() + end);
  }
  return corpus;
}

EmbeddingNet RequireNet(const GlobalOptions &g) {
  if (g.weights.empty()) throw UsageError("--weights is required");
  return LoadWeights(g.weights).net;
}

SpeakerDb LoadDbOrEmpty(const std::string &path) {
  if (path.empty() || !fs::exists(path)) return {};
  return LoadDb(path);
}

std::string Fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::atomic<IdentificationService *> g_serving{nullptr};

extern "C" void HandleStopSignal(int) {
  if (IdentificationService *s = g_serving.load()) s->Stop();
}

int DoTrain(const GlobalOptions &g, const CorpusOptions &co, TrainConfig cfg,
            const std::string &feature, const std::string &out_path,
            std::ostream &out) {
  const std::string target = out_path.empty() ? g.weights : out_path;
  if (target.empty()) throw UsageError("train needs --out or --weights");
  const auto kind = ParseFeatureKind(feature);
  if (!kind) throw UsageError("unknown feature kind '" + feature + "'");
  cfg.feature_kind = *kind;
  cfg.rng_seed = g.seed;
  const Corpus corpus = ResolveCorpus(co, g.seed);

  out << "corpus " << corpus.speakers.size() << " speakers "
      << corpus.NumUtterances() << " utterances\n";
  const TrainResult result = Train(corpus, cfg, [&](const EpochLog &e) {
    out << "epoch " << e.epoch << " steps " << e.steps << " loss "
        << Fixed(e.mean_loss, 6) << " train_acc " << Fixed(e.train_accuracy, 4)
        << " val_acc "
        << (std::isnan(e.validation_accuracy) ? std::string("n/a")
                                              : Fixed(e.validation_accuracy, 4))
        << '\n';
  });
  const auto bytes = SerializeWeights(result.model.net, &result.model.head);
  SaveWeights(result.model.net, &result.model.head, target);
  char crc[16];
  std::snprintf(crc, sizeof(crc), "%08lx",
                crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
  out << "saved " << target << " bytes " << bytes.size() << " crc32 " << crc
      << '\n';
  return kExitOk;
}

int DoEmbed(const GlobalOptions &g, const std::string &wav, std::ostream &out) {
  const Embedding e = EmbedAudio(RequireNet(g), LoadWav(wav), g.crop);
  for (std::size_t i = 0; i < e.dim(); ++i) {
    out << (i ? " " : "") << Fixed(e.values()[i], 9);
  }
  out << '\n';
  return kExitOk;
}

int DoVerify(const GlobalOptions &g, const std::string &a, const std::string &b,
             double threshold, std::ostream &out) {
  const EmbeddingNet net = RequireNet(g);
  const Verification v = Verify(EmbedAudio(net, LoadWav(a), g.crop),
                                EmbedAudio(net, LoadWav(b), g.crop), threshold);
  out << "score " << Fixed(v.score, 6) << '\n'
      << "decision " << (v.verdict == Verdict::kSame ? "same" : "different")
      << '\n';
  return kExitOk;
}

int DoIdentify(const GlobalOptions &g, const std::string &wav,
               std::ostream &out) {
  const EmbeddingNet net = RequireNet(g);
  const SpeakerDb db = LoadDbOrEmpty(g.db);
  const IdentificationResult r =
      Identify(EmbedAudio(net, LoadWav(wav), g.crop), db);
  out << "decision " << (r.known() ? "known " + *r.speaker : "unknown") << '\n';
  for (const auto &s : r.scores) {
    out << "score " << s.name << ' ' << Fixed(s.score, 9) << '\n';
  }
  return kExitOk;
}

int DoEnroll(const GlobalOptions &g, const std::string &wav,
             const std::string &name, std::ostream &out) {
  if (g.db.empty()) throw UsageError("enroll needs --db");
  const EmbeddingNet net = RequireNet(g);
  const Embedding e = EmbedAudio(net, LoadWav(wav), g.crop);
  SpeakerDb db = LoadDbOrEmpty(g.db);
  const std::size_t count = db.Enroll(name, e);
  SaveDb(db, g.db);
  out << "enrolled " << name << " entry_count " << count << '\n';
  return kExitOk;
}

int DoEvalEer(const GlobalOptions &g, const std::string &trials_path,
              const std::string &audio_dir, const CorpusOptions &co, int pairs,
              std::vector<double> lengths, std::ostream &out,
              std::ostream &err) {
  const EmbeddingNet net = RequireNet(g);
  if (lengths.empty()) lengths.push_back(g.crop);
  TrialList trials;
  AudioSource source;
  std::optional<Corpus> corpus;
  if (!trials_path.empty()) {
    if (co.synth_speakers != 0) {
      throw UsageError("give a trial list or --synth, not both");
    }
    trials = LoadTrials(trials_path);
    source = FileAudioSource(audio_dir.empty()
                                 ? fs::path(trials_path).parent_path()
                                 : fs::path(audio_dir));
  } else {
    if (co.synth_speakers == 0) throw UsageError("give a trial list or --synth");
    corpus = ResolveCorpus(co, g.seed);
    trials = MakeBalancedTrials(*corpus, pairs, g.seed);
    source = CorpusAudioSource(*corpus);
  }
  const TrialCounts counts = CountTrials(trials);
  err << "trials " << trials.size() << " same " << counts.same << " different "
      << counts.different << '\n';
  WriteLengthCsv(EerVsLength(net, trials, source, lengths), out);
  return kExitOk;
}

int DoHeatmap(const GlobalOptions &g, const CorpusOptions &co,
              const std::vector<int> &speakers, const std::vector<int> &entries,
              int queries, bool table, std::ostream &out) {
  const EmbeddingNet net = RequireNet(g);
  const Corpus corpus = ResolveCorpus(co, g.seed);
  const HeatmapGrid grid = IdentificationHeatmap(net, corpus, speakers, entries,
                                                 queries, g.seed, g.crop);
  if (table) {
    WriteHeatmapTable(grid, out);
  } else {
    WriteHeatmapCsv(grid, out);
  }
  return kExitOk;
}

int DoInfo(const GlobalOptions &g, bool csv, std::ostream &out) {
  const auto rows = MemoryReport(kAllFeatureKinds);
  if (csv) {
    WriteMemoryCsv(rows, out);
  } else {
    WriteMemoryTable(rows, out);
  }
  if (!g.weights.empty()) {
    const WeightFile w = LoadWeights(g.weights);
    out << "weights " << g.weights << " kind "
        << FeatureKindName(w.net.feature_kind()) << " input_dim "
        << w.net.input_dim() << " hidden " << w.net.hidden() << " layers "
        << w.net.num_layers() << " params " << w.net.ParamCount() << " head "
        << (w.head ? std::to_string(w.head->b.size()) : std::string("none"))
        << '\n';
  }
  return kExitOk;
}

int DoServe(const GlobalOptions &g, ServiceConfig cfg, std::ostream &out,
            std::ostream &err) {
  cfg.db_path = g.db;
  cfg.crop_s = g.crop;
  IdentificationService service(RequireNet(g), LoadDbOrEmpty(g.db), cfg);
  g_serving.store(&service);
  auto prev_int = std::signal(SIGINT, HandleStopSignal);
  auto prev_term = std::signal(SIGTERM, HandleStopSignal);
  out << "listening on " << cfg.host << ':' << cfg.port << std::endl;
  const bool ok = service.Listen();
  std::signal(SIGINT, prev_int);
  std::signal(SIGTERM, prev_term);
  g_serving.store(nullptr);
  if (!ok) {
    err << "error: could not serve on " << cfg.host << ':' << cfg.port << '\n';
    return kExitDomainError;
  }
  return kExitOk;
}

int DoMakeSynth(const GlobalOptions &g, const std::string &dir, int speakers,
                int utterances, int pairs, int first_utt, std::ostream &out) {
  const SynthCorpus synth = MakeSynthCorpus(speakers, utterances, g.seed);
  SaveCorpusDir(synth.corpus, dir);
  out << "wrote " << speakers << " speakers x " << utterances
      << " utterances to " << dir << '\n';
  if (pairs > 0) {
    const TrialList trials =
        MakeBalancedTrials(synth.corpus, pairs, g.seed, first_utt);
    const fs::path path = fs::path(dir) / "trials.txt";
    std::ofstream os(path);
    WriteTrials(trials, os);
    if (!os) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
    out << "wrote " << trials.size() << " trials to " << path.string() << '\n';
  }
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string> &args, std::ostream &out,
           std::ostream &err) {
  CLI::App app{"BLSTM speaker embeddings, verification and identification",
               "blspk"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  GlobalOptions g;
  app.add_option("--weights", g.weights, "Embedding network weight file");
  app.add_option("--db", g.db, "Speaker database JSON file");
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--crop", g.crop, "Crop length in seconds")
      ->check(CLI::Range(0.25, 4.0));

  // train
  auto *train = app.add_subcommand("train", "Train an embedding network");
  CorpusOptions train_corpus;
  AddCorpusOptions(train, &train_corpus, true);
  TrainConfig train_cfg;
  std::string train_feature = "SpecdB";
  std::string train_out;
  train->add_option("--out", train_out, "Output weight file (default --weights)");
  train->add_option("--feature", train_feature, "Feature kind");
  train->add_option("--lr", train_cfg.learning_rate, "Adam learning rate")
      ->check(CLI::PositiveNumber);
  train->add_option("--batch", train_cfg.batch_size, "Minibatch size")
      ->check(CLI::Range(1, 100000));
  train->add_option("--epochs", train_cfg.epochs, "Epochs")
      ->check(CLI::Range(1, 100000));
  train->add_option("--segment", train_cfg.segment_len_s,
                    "Training crop length in seconds")
      ->check(CLI::Range(0.25, 2.0));
  train->add_option("--examples-per-epoch", train_cfg.examples_per_epoch,
                    "Crops per epoch (0: one per utterance)")
      ->check(CLI::NonNegativeNumber);
  train->add_option("--validation-size", train_cfg.validation_size,
                    "Validation crops (0: no validation split)")
      ->check(CLI::NonNegativeNumber);
  train->add_option("--hidden", train_cfg.hidden, "Hidden units per direction")
      ->check(CLI::Range(1, 4096));
  train->add_option("--layers", train_cfg.num_layers, "BLSTM layers")
      ->check(CLI::Range(1, 16));

  // embed
  auto *embed = app.add_subcommand("embed", "Print the embedding of a WAV file");
  std::string embed_wav;
  embed->add_option("wav", embed_wav, "Input WAV")->required();

  // verify
  auto *verify = app.add_subcommand("verify", "Score two WAV files");
  std::string verify_a, verify_b;
  double threshold = 0.0;
  verify->add_option("a", verify_a, "First WAV")->required();
  verify->add_option("b", verify_b, "Second WAV")->required();
  verify->add_option("--threshold", threshold, "Decision threshold");

  // identify
  auto *identify = app.add_subcommand("identify", "Identify the speaker of a WAV file");
  std::string identify_wav;
  identify->add_option("wav", identify_wav, "Query WAV")->required();

  // enroll
  auto *enroll = app.add_subcommand("enroll", "Add a WAV file to a speaker's entries");
  std::string enroll_wav, enroll_name;
  enroll->add_option("wav", enroll_wav, "Enrollment WAV")->required();
  enroll->add_option("--name", enroll_name, "Speaker name")->required();

  // eval-eer
  auto *eval = app.add_subcommand("eval-eer", "Verification EER over a trial list");
  std::string trials_path, audio_dir;
  CorpusOptions eval_corpus;
  int eval_pairs = 200;
  std::vector<double> lengths;
  eval->add_option("trials", trials_path, "Trial list (label path_a path_b)");
  eval->add_option("--audio-dir", audio_dir,
                   "Base directory for trial paths (default: trial list's)");
  AddCorpusOptions(eval, &eval_corpus, false);
  eval->add_option("--pairs", eval_pairs, "Balanced pairs drawn with --synth")
      ->check(CLI::Range(2, 1000000));
  eval->add_option("--lengths", lengths, "Crop lengths in seconds")
      ->delimiter(',')
      ->check(CLI::Range(0.25, 4.0));

  // heatmap
  auto *heatmap = app.add_subcommand("heatmap", "Identification accuracy grid");
  CorpusOptions heatmap_corpus;
  AddCorpusOptions(heatmap, &heatmap_corpus, true);
  std::vector<int> heat_speakers{1, 2, 3, 4, 5};
  std::vector<int> heat_entries{1, 2, 3, 4, 5};
  int queries = 20;
  bool heat_table = false;
  heatmap->add_option("--speakers", heat_speakers, "Enrolled speaker counts")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  heatmap->add_option("--entries", heat_entries, "Entries per speaker")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  heatmap->add_option("--queries", queries, "Queries per cell")
      ->check(CLI::Range(1, 1000000));
  heatmap->add_flag("--table", heat_table, "Aligned table instead of CSV");

  // info
  auto *info = app.add_subcommand("info", "Parameter and memory figures");
  bool info_csv = false;
  info->add_flag("--csv", info_csv, "CSV instead of a table");

  // serve
  auto *serve = app.add_subcommand("serve", "Run the HTTP identification service");
  ServiceConfig serve_cfg;
  serve->add_option("--port", serve_cfg.port, "TCP port")->check(CLI::Range(0, 65535));
  serve->add_option("--host", serve_cfg.host, "Bind address");
  serve->add_flag("--auto-update", serve_cfg.auto_update,
                  "Append embeddings of recognized speakers to their entries");
  serve->add_option("--pending-ttl", serve_cfg.pending_ttl_s,
                    "Seconds an unknown utterance waits for a name")
      ->check(CLI::PositiveNumber);
  std::string ui_dir;
  serve->add_option("--ui-dir", ui_dir, "Static UI files served at /");

  // make-synth
  auto *synth = app.add_subcommand("make-synth", "Write a synthetic corpus");
  std::string synth_dir;
  int synth_speakers = 8, synth_utts = 20, synth_pairs = 0, synth_first = 0;
  synth->add_option("dir", synth_dir, "Output directory")->required();
  synth->add_option("--speakers", synth_speakers, "Speakers")
      ->check(CLI::Range(2, 1000));
  synth->add_option("--utterances", synth_utts, "Utterances per speaker")
      ->check(CLI::Range(1, 10000));
  synth->add_option("--pairs", synth_pairs,
                    "Also write a balanced trials.txt with this many pairs");
  synth->add_option("--first-utt", synth_first,
                    "Draw trial utterances from this index on")
      ->check(CLI::NonNegativeNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp &e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp &e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (train->parsed()) {
      return DoTrain(g, train_corpus, train_cfg, train_feature, train_out, out);
    }
    if (embed->parsed()) return DoEmbed(g, embed_wav, out);
    if (verify->parsed()) return DoVerify(g, verify_a, verify_b, threshold, out);
    if (identify->parsed()) return DoIdentify(g, identify_wav, out);
    if (enroll->parsed()) return DoEnroll(g, enroll_wav, enroll_name, out);
    if (eval->parsed()) {
      return DoEvalEer(g, trials_path, audio_dir, eval_corpus, eval_pairs,
                       lengths, out, err);
    }
    if (heatmap->parsed()) {
      return DoHeatmap(g, heatmap_corpus, heat_speakers, heat_entries, queries,
                       heat_table, out);
    }
    if (info->parsed()) return DoInfo(g, info_csv, out);
    if (serve->parsed()) {
      serve_cfg.ui_dir = ui_dir;
      return DoServe(g, serve_cfg, out, err);
    }
    if (synth->parsed()) {
      return DoMakeSynth(g, synth_dir, synth_speakers, synth_utts, synth_pairs,
                         synth_first, out);
    }
  } catch (const UsageError &e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const Error &e) {
    err << "error: " << e.what() << '\n';
    return kExitDomainError;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitDomainError;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace blspk
