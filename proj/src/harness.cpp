#include "kaes/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "kaes/error.hpp"
#include "kaes/fusion.hpp"
#include "kaes/metrics.hpp"
#include "kaes/parallel.hpp"
#include "kaes/random.hpp"

namespace kaes {

std::string_view to_string(Mode mode) { return mode == Mode::in_domain ? "in-domain" : "cross-domain"; }

std::string_view to_string(Representation rep) {
  switch (rep) {
    case Representation::hisk: return "hisk";
    case Representation::boswe: return "boswe";
    case Representation::fused: return "fused";
  }
  return "unknown";
}

Representation parse_representation(std::string_view name) {
  if (name == "hisk") return Representation::hisk;
  if (name == "boswe") return Representation::boswe;
  if (name == "fused") return Representation::fused;
  throw ValidationError("unknown representation '" + std::string(name) + "' (expected hisk, boswe or fused)");
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "text") return ReportFormat::text;
  if (name == "csv") return ReportFormat::csv;
  throw ValidationError("unknown report format '" + std::string(name) + "' (expected text or csv)");
}

std::vector<std::pair<int, int>> default_transfer_pairs() { return {{1, 2}, {3, 4}, {5, 6}, {7, 8}}; }

bool ExperimentConfig::needs_embeddings() const {
  return std::any_of(representations.begin(), representations.end(),
                     [](Representation r) { return r != Representation::hisk; });
}

void ExperimentConfig::validate() const {
  if (representations.empty()) throw ValidationError("no representation configured");
  for (const int p : prompts) asap_score_range(p);
  for (const auto& [s, t] : pairs) {
    asap_score_range(s);
    asap_score_range(t);
    if (s == t) throw ValidationError("source and target prompt must differ");
  }
  if (ngrams.min < 1 || ngrams.max < ngrams.min) throw ValidationError("invalid n-gram range");
  if (needs_embeddings() && k < 1) throw ValidationError("k must be >= 1");
  if (folds < 2) throw ValidationError("at least two folds are required");
  for (const int n : n_t_values)
    if (n < 0) throw ValidationError("n_t must be non-negative");
  svr.validate();
}

Dataset load_dataset(const ExperimentConfig& config) {
  config.validate();
  if (config.data_path.empty()) throw Error("no data path given (--data)");
  if (!std::filesystem::exists(config.data_path)) throw Error("data file not found: " + config.data_path);
  if (config.needs_embeddings()) {
    if (config.embeddings_path.empty())
      throw Error("representation needs word embeddings but no --embeddings path was given");
    if (!std::filesystem::exists(config.embeddings_path))
      throw Error("embeddings file not found: " + config.embeddings_path);
  }
  Dataset data;
  data.essays = load_asap_tsv(config.data_path);
  if (config.needs_embeddings())
    data.embeddings = load_word2vec_binary_file(config.embeddings_path, config.vocab_limit);
  return data;
}

std::uint64_t corpus_fingerprint(std::span<const Essay> essays, NGramRange range) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](std::string_view s) {
    for (const char c : s) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ULL;
    h = splitmix64(h ^ s.size());
  };
  mix("hisk");
  mix(std::to_string(range.min) + ":" + std::to_string(range.max));
  for (const auto& e : essays) {
    mix(e.id);
    mix(e.text);
  }
  return h;
}

namespace {

void note(const ExperimentConfig& cfg, const std::string& msg) {
  if (cfg.log) cfg.log(msg);
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = average(v);
  double ss = 0.0;
  for (const double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

/// Everything one evaluation unit (a prompt, or a source+target union) needs.
struct Unit {
  std::vector<Essay> essays;
  std::vector<std::string> ids;
  std::optional<KernelMatrix> hisk;              // full Gram, normalized if configured
  std::vector<std::vector<std::string>> tokens;  // per essay
};

KernelMatrix hisk_gram(const ExperimentConfig& cfg, std::span<const Essay> essays,
                       const std::vector<std::string>& ids) {
  std::filesystem::path cache_path;
  if (!cfg.cache_dir.empty()) {
    std::filesystem::create_directories(cfg.cache_dir);
    cache_path = std::filesystem::path(cfg.cache_dir) / ("hisk-" + hex64(corpus_fingerprint(essays, cfg.ngrams)) + ".kaeskm");
    if (std::filesystem::exists(cache_path)) {
      KernelMatrix cached = load_kernel_cache(cache_path.string());
      if (cached.kind == KernelKind::hisk_raw && cached.row_ids == ids && cached.col_ids == ids) {
        note(cfg, "hisk cache hit " + cache_path.string());
        return cached;
      }
      note(cfg, "hisk cache mismatch, recomputing " + cache_path.string());
    }
  }
  std::vector<NGramProfile> profiles(essays.size());
  parallel_for(essays.size(), cfg.threads, [&](std::size_t i) {
    profiles[i] = extract_ngram_counts(essays[i].text, cfg.ngrams.min, cfg.ngrams.max);
  });
  note(cfg, "computing hisk gram over " + std::to_string(essays.size()) + " essays");
  KernelMatrix gram = gram_matrix(profiles, ids, cfg.threads);
  if (!cache_path.empty()) {
    const auto tmp = cache_path.string() + ".tmp";
    save_kernel_cache(tmp, gram);
    std::filesystem::rename(tmp, cache_path);
    note(cfg, "hisk cache stored " + cache_path.string());
  }
  return gram;
}

bool wants(const ExperimentConfig& cfg, Representation r) {
  return std::find(cfg.representations.begin(), cfg.representations.end(), r) != cfg.representations.end();
}

Unit prepare_unit(const ExperimentConfig& cfg, std::vector<Essay> essays, const Dataset& data) {
  Unit u;
  u.essays = std::move(essays);
  for (const auto& e : u.essays) u.ids.push_back(e.id);
  {
    std::unordered_set<std::string> unique(u.ids.begin(), u.ids.end());
    if (unique.size() != u.ids.size()) throw ValidationError("duplicate essay ids in evaluation set");
  }
  if (wants(cfg, Representation::hisk) || wants(cfg, Representation::fused)) {
    KernelMatrix raw = hisk_gram(cfg, u.essays, u.ids);
    u.hisk = cfg.normalize_hisk ? normalize_kernel(raw) : std::move(raw);
  }
  if (cfg.needs_embeddings()) {
    if (!data.embeddings) throw Error("representation needs word embeddings but none were loaded");
    std::size_t tokens = 0, oov = 0;
    for (const auto& e : u.essays) {
      auto toks = tokenize(e.text);
      std::size_t miss = 0;
      for (const auto& t : toks) miss += !data.embeddings->index(t).has_value();
      if (cfg.log_documents) {
        char buf[96];
        std::snprintf(buf, sizeof buf, " oov=%zu/%zu", miss, toks.size());
        note(cfg, "doc " + e.id + buf);
      }
      tokens += toks.size();
      oov += miss;
      u.tokens.push_back(std::move(toks));
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "tokens=%zu oov=%zu (%.2f%%)", tokens, oov,
                  tokens == 0 ? 0.0 : 100.0 * static_cast<double>(oov) / static_cast<double>(tokens));
    note(cfg, buf);
  }
  return u;
}

struct CellOutcome {
  std::array<std::optional<double>, 3> kappa;
  std::array<std::string, 3> failure;
  StageRecord record;
  std::size_t models = 0;
};

CellOutcome run_cell(const ExperimentConfig& cfg, const Unit& u, const Dataset& data,
                     const std::vector<std::size_t>& train, const std::vector<std::size_t>& eval,
                     ScoreRange eval_range, std::uint64_t cell_seed, std::string label, unsigned threads) {
  CellOutcome out;
  out.record.cell = std::move(label);
  for (const auto i : train) out.record.train_ids.push_back(u.ids[i]);
  for (const auto i : eval) out.record.eval_ids.push_back(u.ids[i]);

  std::optional<KernelMatrix> h_train, h_eval;
  if (u.hisk) {
    h_train = u.hisk->slice(train, train);
    h_eval = u.hisk->slice(eval, train);
  }

  std::optional<KernelMatrix> b_train, b_eval;
  std::string boswe_error;
  if (cfg.needs_embeddings()) {
    try {
      const EmbeddingModel& model = *data.embeddings;
      // Codebook vectors: distinct in-vocabulary token types of the training
      // documents, in first-appearance order.
      std::vector<float> vectors;
      std::unordered_set<std::size_t> taken;
      std::set<std::string> codebook_docs;
      for (const auto i : train) {
        for (const auto& tok : u.tokens[i]) {
          const auto idx = model.index(tok);
          if (!idx || !taken.insert(*idx).second) continue;
          const auto v = model.vector(*idx);
          vectors.insert(vectors.end(), v.begin(), v.end());
        }
        out.record.codebook_ids.push_back(u.ids[i]);
      }
      KMeansOptions km;
      km.k = cfg.k;
      km.seed = cell_seed;
      km.max_iters = cfg.kmeans_max_iters;
      km.threads = threads;
      km.index = cfg.index;
      const Codebook book = fit_codebook(vectors, model.dim(), km);
      std::vector<BosweHistogram> htrain, heval;
      for (const auto i : train) htrain.push_back(build_histogram(book, u.tokens[i], model, true));
      for (const auto i : eval) heval.push_back(build_histogram(book, u.tokens[i], model, true));
      b_train = boswe_gram_matrix(htrain, out.record.train_ids, threads);
      b_eval = boswe_kernel_matrix(heval, out.record.eval_ids, htrain, out.record.train_ids, threads);
    } catch (const std::exception& e) {
      boswe_error = std::string("boswe: ") + e.what();
    }
  }

  std::vector<double> y;
  for (const auto i : train) y.push_back(u.essays[i].unit_score);
  std::vector<int> gold;
  for (const auto i : eval) gold.push_back(u.essays[i].raw_score);

  for (const Representation rep : cfg.representations) {
    const auto slot = static_cast<std::size_t>(rep);
    try {
      KernelMatrix kt, ke;
      if (rep != Representation::hisk && !b_train) throw Error(boswe_error);
      switch (rep) {
        case Representation::hisk:
          kt = *h_train;
          ke = *h_eval;
          break;
        case Representation::boswe:
          kt = *b_train;
          ke = *b_eval;
          break;
        case Representation::fused:
          kt = sum_kernels(*h_train, *b_train);
          ke = sum_kernels(*h_eval, *b_eval);
          break;
      }
      const SvrModel model = train_nu_svr(kt, y, cfg.svr, cell_seed);
      ++out.models;
      if (model.warning()) note(cfg, out.record.cell + " " + std::string(to_string(rep)) + ": SVR hit max_iterations");
      const auto unit = predict(model, ke);
      std::vector<int> pred;
      for (const double p : unit) pred.push_back(unscale_score(p, eval_range));
      out.kappa[slot] = qwk(pred, gold, eval_range).kappa;
    } catch (const std::exception& e) {
      out.failure[slot] = e.what();
    }
  }
  return out;
}

struct RunAccumulator {
  // per representation: per repetition list of kappas
  std::map<int, std::vector<double>> by_rep[3];
  std::size_t failed[3] = {0, 0, 0};
  std::string failure[3];
};

void add_outcome(RunAccumulator& acc, int repetition, const CellOutcome& o) {
  for (std::size_t s = 0; s < 3; ++s) {
    if (o.kappa[s])
      acc.by_rep[s][repetition].push_back(*o.kappa[s]);
    else if (!o.failure[s].empty()) {
      ++acc.failed[s];
      if (acc.failure[s].empty()) acc.failure[s] = o.failure[s];
    }
  }
}

void emit_cells(const ExperimentConfig& cfg, const RunAccumulator& acc, const std::string& key, int n_t,
                ResultTable& table) {
  for (const Representation rep : cfg.representations) {
    const auto s = static_cast<std::size_t>(rep);
    ResultCell cell;
    cell.key = key;
    cell.n_t = n_t;
    cell.representation = rep;
    cell.failed = acc.failed[s];
    cell.failure = acc.failure[s];
    std::vector<double> all;
    for (const auto& [r, kappas] : acc.by_rep[s]) {
      cell.per_repetition.push_back(average(kappas));
      all.insert(all.end(), kappas.begin(), kappas.end());
    }
    cell.runs = all.size();
    if (!all.empty()) {
      cell.qwk = average(all);
      cell.std_dev = sample_std(cell.per_repetition);
      cell.fold_std = sample_std(all);
    }
    table.cells.push_back(std::move(cell));
  }
}

std::vector<Essay> essays_of(const Dataset& data, int prompt) {
  std::vector<Essay> out;
  for (const auto& e : data.essays)
    if (e.prompt == prompt) out.push_back(e);
  return out;
}

std::vector<int> prompts_present(const Dataset& data) {
  std::set<int> s;
  for (const auto& e : data.essays) s.insert(e.prompt);
  return {s.begin(), s.end()};
}

}  // namespace

ExperimentResult run_in_domain(const ExperimentConfig& cfg, const Dataset& data) {
  cfg.validate();
  if (cfg.needs_embeddings() && !data.embeddings) throw Error("representation needs word embeddings");
  ExperimentResult result;
  result.table.mode = Mode::in_domain;
  const int reps = cfg.effective_repetitions();
  const auto prompts = cfg.prompts.empty() ? prompts_present(data) : cfg.prompts;

  for (const int prompt : prompts) {
    const ScoreRange range = asap_score_range(prompt);
    RunAccumulator acc;
    try {
      Unit unit = prepare_unit(cfg, essays_of(data, prompt), data);
      if (unit.essays.empty()) throw ValidationError("no essays for prompt " + std::to_string(prompt));
      const FoldPlan plan = make_folds(unit.essays, cfg.folds, reps, derive_seed(cfg.seed, 0x100 + prompt));
      const std::size_t cells = static_cast<std::size_t>(reps) * static_cast<std::size_t>(cfg.folds);
      const unsigned outer = cfg.threads == 0 ? default_thread_count() : cfg.threads;
      const unsigned inner = outer > 1 ? 1 : cfg.threads;
      std::vector<CellOutcome> outcomes(cells);
      parallel_for(cells, outer, [&](std::size_t c) {
        const int rep = static_cast<int>(c) / cfg.folds;
        const int fold = static_cast<int>(c) % cfg.folds;
        const std::uint64_t seed = derive_seed(derive_seed(cfg.seed, 0x200 + prompt), c);
        outcomes[c] = run_cell(cfg, unit, data, plan.complement(rep, fold), plan.members(rep, fold), range, seed,
                               "prompt=" + std::to_string(prompt) + " rep=" + std::to_string(rep) +
                                   " fold=" + std::to_string(fold),
                               inner);
      });
      for (std::size_t c = 0; c < cells; ++c) {
        add_outcome(acc, static_cast<int>(c) / cfg.folds, outcomes[c]);
        result.models_trained += outcomes[c].models;
        result.trace.push_back(std::move(outcomes[c].record));
      }
    } catch (const std::exception& e) {
      for (std::size_t s = 0; s < 3; ++s) {
        acc.failed[s] += 1;
        if (acc.failure[s].empty()) acc.failure[s] = e.what();
      }
    }
    note(cfg, "prompt " + std::to_string(prompt) + " done");
    emit_cells(cfg, acc, std::to_string(prompt), -1, result.table);
  }
  result.table.sort();
  return result;
}

ExperimentResult run_in_domain(const ExperimentConfig& cfg) { return run_in_domain(cfg, load_dataset(cfg)); }

ExperimentResult run_cross_domain(const ExperimentConfig& cfg, const Dataset& data) {
  cfg.validate();
  if (cfg.needs_embeddings() && !data.embeddings) throw Error("representation needs word embeddings");
  ExperimentResult result;
  result.table.mode = Mode::cross_domain;
  const int reps = cfg.effective_repetitions();
  auto pairs = cfg.pairs;
  if (pairs.empty()) {
    const auto present = prompts_present(data);
    for (const auto& p : default_transfer_pairs())
      if (std::binary_search(present.begin(), present.end(), p.first) &&
          std::binary_search(present.begin(), present.end(), p.second))
        pairs.push_back(p);
  }

  for (const auto& [source, target] : pairs) {
    const std::string key = std::to_string(source) + "->" + std::to_string(target);
    const ScoreRange range = asap_score_range(target);
    const int pair_code = source * 16 + target;
    std::vector<RunAccumulator> acc(cfg.n_t_values.size());
    try {
      auto src = essays_of(data, source);
      auto tgt = essays_of(data, target);
      if (src.empty() || tgt.empty()) throw ValidationError("pair " + key + " lacks source or target essays");
      const std::size_t n_src = src.size();
      std::vector<Essay> all = src;
      all.insert(all.end(), tgt.begin(), tgt.end());
      Unit unit = prepare_unit(cfg, std::move(all), data);
      std::unordered_map<std::string, std::size_t> pos;
      for (std::size_t i = 0; i < unit.ids.size(); ++i) pos.emplace(unit.ids[i], i);

      const std::uint64_t split_seed = derive_seed(cfg.seed, 0x300 + pair_code);
      const std::size_t cells = cfg.n_t_values.size() * static_cast<std::size_t>(reps);
      std::vector<std::optional<CellOutcome>> outcomes(cells);
      std::vector<std::string> errors(cells);
      const unsigned outer = cfg.threads == 0 ? default_thread_count() : cfg.threads;
      const unsigned inner = outer > 1 ? 1 : cfg.threads;
      parallel_for(cells, outer, [&](std::size_t c) {
        const std::size_t ni = c / static_cast<std::size_t>(reps);
        const int rep = static_cast<int>(c % static_cast<std::size_t>(reps));
        const int n_t = cfg.n_t_values[ni];
        try {
          const TransferSplit split = make_transfer_split(tgt, n_t, rep, split_seed, cfg.folds);
          std::vector<std::size_t> train(n_src);
          for (std::size_t i = 0; i < n_src; ++i) train[i] = i;
          for (const auto& id : split.extra_train_ids) train.push_back(pos.at(id));
          std::vector<std::size_t> eval;
          for (const auto& id : split.eval_ids) eval.push_back(pos.at(id));
          const std::uint64_t seed =
              derive_seed(derive_seed(cfg.seed, 0x400 + pair_code), static_cast<std::uint64_t>(n_t) * 1000 + rep);
          outcomes[c] = run_cell(cfg, unit, data, train, eval, range, seed,
                                 "pair=" + key + " n_t=" + std::to_string(n_t) + " rep=" + std::to_string(rep), inner);
        } catch (const std::exception& e) {
          errors[c] = e.what();
        }
      });
      for (std::size_t c = 0; c < cells; ++c) {
        const std::size_t ni = c / static_cast<std::size_t>(reps);
        const int rep = static_cast<int>(c % static_cast<std::size_t>(reps));
        if (!outcomes[c]) {
          for (std::size_t s = 0; s < 3; ++s) {
            ++acc[ni].failed[s];
            if (acc[ni].failure[s].empty()) acc[ni].failure[s] = errors[c];
          }
          continue;
        }
        add_outcome(acc[ni], rep, *outcomes[c]);
        result.models_trained += outcomes[c]->models;
        result.trace.push_back(std::move(outcomes[c]->record));
      }
    } catch (const std::exception& e) {
      for (auto& a : acc)
        for (std::size_t s = 0; s < 3; ++s) {
          ++a.failed[s];
          if (a.failure[s].empty()) a.failure[s] = e.what();
        }
    }
    note(cfg, "pair " + key + " done");
    for (std::size_t ni = 0; ni < cfg.n_t_values.size(); ++ni)
      emit_cells(cfg, acc[ni], key, cfg.n_t_values[ni], result.table);
  }
  result.table.sort();
  return result;
}

ExperimentResult run_cross_domain(const ExperimentConfig& cfg) { return run_cross_domain(cfg, load_dataset(cfg)); }

namespace {

std::pair<int, int> key_order(const std::string& key) {
  if (key == "overall") return {1000, 0};
  const auto arrow = key.find("->");
  try {
    if (arrow == std::string::npos) return {std::stoi(key), -1};
    return {std::stoi(key.substr(0, arrow)), std::stoi(key.substr(arrow + 2))};
  } catch (const std::exception&) {
    return {999, 0};
  }
}

std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<std::string> csv_split(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", line_no);
  fields.push_back(std::move(cur));
  return fields;
}

constexpr const char* kCsvHeader = "mode,key,representation,n_t,qwk,std,fold_std,runs,failed,failure";

}  // namespace

void ResultTable::sort() {
  std::stable_sort(cells.begin(), cells.end(), [](const ResultCell& a, const ResultCell& b) {
    const auto ka = key_order(a.key), kb = key_order(b.key);
    if (ka != kb) return ka < kb;
    if (a.n_t != b.n_t) return a.n_t < b.n_t;
    return a.representation < b.representation;
  });
}

std::optional<double> ResultTable::overall(Representation rep) const {
  std::vector<double> v;
  for (const auto& c : cells)
    if (c.key != "overall" && c.representation == rep && c.ok()) v.push_back(c.qwk);
  if (v.empty()) return std::nullopt;
  return average(v);
}

std::string emit_report(const ResultTable& table_in, ReportFormat format) {
  ResultTable table = table_in;
  table.sort();
  // Overall rows: in-domain tables with at least two prompts.
  std::vector<ResultCell> overall;
  if (table.mode == Mode::in_domain) {
    for (const Representation rep : {Representation::hisk, Representation::boswe, Representation::fused}) {
      std::size_t prompts = 0;
      for (const auto& c : table.cells) prompts += (c.representation == rep && c.ok());
      if (prompts < 2) continue;
      ResultCell cell;
      cell.key = "overall";
      cell.representation = rep;
      cell.qwk = *table.overall(rep);
      cell.runs = prompts;
      overall.push_back(cell);
    }
  }

  std::ostringstream out;
  if (format == ReportFormat::csv) {
    out << kCsvHeader << '\n';
    auto row = [&](const ResultCell& c, bool is_overall) {
      out << to_string(table.mode) << ',' << csv_field(c.key) << ',' << to_string(c.representation) << ','
          << (c.n_t < 0 ? std::string() : std::to_string(c.n_t)) << ',' << (c.ok() ? fmt3(c.qwk) : std::string())
          << ',' << (c.ok() && !is_overall ? fmt3(c.std_dev) : std::string()) << ','
          << (c.ok() && !is_overall ? fmt3(c.fold_std) : std::string()) << ',' << c.runs << ',' << c.failed << ','
          << csv_field(c.failure) << '\n';
    };
    for (const auto& c : table.cells) row(c, false);
    for (const auto& c : overall) row(c, true);
    return out.str();
  }

  char buf[256];
  std::snprintf(buf, sizeof buf, "%-8s %-14s %5s %7s %7s %6s\n", "key", "representation", "n_t", "qwk", "std", "runs");
  out << buf;
  auto row = [&](const ResultCell& c, bool is_overall) {
    const std::string nt = c.n_t < 0 ? "-" : std::to_string(c.n_t);
    const std::string q = c.ok() ? fmt3(c.qwk) : "failed";
    const std::string sd = c.ok() && !is_overall ? fmt3(c.std_dev) : "-";
    std::snprintf(buf, sizeof buf, "%-8s %-14s %5s %7s %7s %6zu", c.key.c_str(),
                  std::string(to_string(c.representation)).c_str(), nt.c_str(), q.c_str(), sd.c_str(), c.runs);
    out << buf;
    if (c.failed > 0) out << "  # " << c.failed << " failed: " << c.failure;
    out << '\n';
  };
  for (const auto& c : table.cells) row(c, false);
  for (const auto& c : overall) row(c, true);
  return out.str();
}

ResultTable parse_report_csv(std::istream& in) {
  ResultTable table;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty report", 1);
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw ParseError("unexpected report header", 1);
  bool mode_set = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = csv_split(line, line_no);
    if (f.size() != 10) throw ParseError("expected 10 fields, found " + std::to_string(f.size()), line_no);
    const Mode mode = f[0] == "in-domain" ? Mode::in_domain : Mode::cross_domain;
    if (f[0] != "in-domain" && f[0] != "cross-domain") throw ParseError("unknown mode '" + f[0] + "'", line_no);
    if (mode_set && mode != table.mode) throw ParseError("mixed modes in one report", line_no);
    table.mode = mode;
    mode_set = true;
    if (f[1] == "overall") continue;
    ResultCell c;
    try {
      c.key = f[1];
      c.representation = parse_representation(f[2]);
      c.n_t = f[3].empty() ? -1 : std::stoi(f[3]);
      c.runs = static_cast<std::size_t>(std::stoull(f[7]));
      c.failed = static_cast<std::size_t>(std::stoull(f[8]));
      if (c.runs > 0) {
        c.qwk = std::stod(f[4]);
        c.std_dev = std::stod(f[5]);
        c.fold_std = std::stod(f[6]);
      }
      c.failure = f[9];
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(std::string("bad report field: ") + e.what(), line_no);
    }
    table.cells.push_back(std::move(c));
  }
  table.sort();
  return table;
}

}  // namespace kaes
