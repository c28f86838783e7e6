#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kaes/boswe.hpp"
#include "kaes/corpus.hpp"
#include "kaes/embeddings.hpp"
#include "kaes/string_kernel.hpp"
#include "kaes/svr.hpp"

namespace kaes {

enum class Mode { in_domain, cross_domain };
enum class Representation { hisk = 0, boswe = 1, fused = 2 };

std::string_view to_string(Mode mode);
std::string_view to_string(Representation rep);
Representation parse_representation(std::string_view name);

/// The four standard source -> target prompt pairs.
std::vector<std::pair<int, int>> default_transfer_pairs();

struct ExperimentConfig {
  Mode mode = Mode::in_domain;
  std::vector<Representation> representations{Representation::fused};
  /// In-domain prompts; empty means every prompt present in the data.
  std::vector<int> prompts;
  /// Cross-domain pairs; empty means default_transfer_pairs() restricted to the data.
  std::vector<std::pair<int, int>> pairs;
  NGramRange ngrams{1, 15};
  bool normalize_hisk = true;
  int k = 500;
  int kmeans_max_iters = 100;
  KdTreeOptions index{};
  SvrConfig svr{};
  std::uint64_t seed = 1;
  int folds = 5;
  /// 0 selects the protocol default: 10 in-domain, 5 cross-domain.
  int repetitions = 0;
  std::vector<int> n_t_values{0, 10, 25, 50, 100};

  std::string data_path;
  std::string embeddings_path;
  std::size_t vocab_limit = kDefaultVocabLimit;
  /// When set, full HISK Gram matrices are cached here between runs.
  std::string cache_dir;
  unsigned threads = 0;
  /// Optional progress sink; per-document OOV lines need log_documents.
  std::function<void(const std::string&)> log;
  bool log_documents = false;

  int effective_repetitions() const { return repetitions > 0 ? repetitions : (mode == Mode::in_domain ? 10 : 5); }
  bool needs_embeddings() const;
  void validate() const;
};

struct Dataset {
  std::vector<Essay> essays;
  std::optional<EmbeddingModel> embeddings;
};

/// Loads the TSV and (when a BOSWE representation is configured) the
/// embeddings named in the config. Missing paths fail before any compute.
Dataset load_dataset(const ExperimentConfig& config);

struct ResultCell {
  std::string key;  // "3" in-domain, "5->6" cross-domain, "overall"
  int n_t = -1;     // -1 for in-domain
  Representation representation = Representation::fused;
  double qwk = 0.0;       // mean over runs
  double std_dev = 0.0;   // std of the per-repetition means
  double fold_std = 0.0;  // std over individual runs
  std::size_t runs = 0;
  std::size_t failed = 0;
  std::string failure;  // first failure reason
  std::vector<double> per_repetition;

  bool ok() const noexcept { return runs > 0; }
};

struct ResultTable {
  Mode mode = Mode::in_domain;
  std::vector<ResultCell> cells;

  /// Orders by key (prompt or pair ascending), then n_t, then representation.
  void sort();
  /// Unweighted mean over the per-prompt cells of one representation.
  std::optional<double> overall(Representation rep) const;
};

/// Id sets used at each stage of one cell, for leakage audits.
struct StageRecord {
  std::string cell;
  std::vector<std::string> codebook_ids;
  std::vector<std::string> train_ids;
  std::vector<std::string> eval_ids;
};

struct ExperimentResult {
  ResultTable table;
  std::vector<StageRecord> trace;
  std::size_t models_trained = 0;
};

ExperimentResult run_in_domain(const ExperimentConfig& config, const Dataset& data);
ExperimentResult run_in_domain(const ExperimentConfig& config);
ExperimentResult run_cross_domain(const ExperimentConfig& config, const Dataset& data);
ExperimentResult run_cross_domain(const ExperimentConfig& config);

enum class ReportFormat { text, csv };
ReportFormat parse_report_format(std::string_view name);

/// Deterministic rendering with three-decimal QWK values. An empty table
/// renders as the header alone.
std::string emit_report(const ResultTable& table, ReportFormat format);
/// Reads the csv produced by emit_report (overall rows are recomputed, not read).
ResultTable parse_report_csv(std::istream& in);

/// Key for the kernel cache: hash of n-gram range, ids and text.
std::uint64_t corpus_fingerprint(std::span<const Essay> essays, NGramRange range);

}  // namespace kaes
