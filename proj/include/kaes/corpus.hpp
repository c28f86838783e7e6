#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace kaes {

/// Inclusive integer score range of one prompt.
struct ScoreRange {
  int min = 0;
  int max = 1;

  int levels() const noexcept { return max - min + 1; }
  bool contains(int score) const noexcept { return score >= min && score <= max; }
  friend bool operator==(const ScoreRange&, const ScoreRange&) = default;
};

inline constexpr int kAsapPromptCount = 8;

/// Score range of ASAP prompt 1..8; throws ValidationError for other ids.
ScoreRange asap_score_range(int prompt);

/// Essay counts per prompt in the public ASAP training file.
int asap_essay_count(int prompt);

struct Essay {
  std::string id;
  int prompt = 0;
  std::string text;  // UTF-8
  int raw_score = 0;
  double unit_score = 0.0;
};

enum class TextEncoding { windows1252, utf8 };

/// Parses an ASAP-style TSV. The header must name at least essay_id,
/// essay_set, essay and domain1_score; other columns are ignored.
/// Rows with a different field count than the header raise ParseError;
/// scores outside the prompt's range raise ValidationError.
std::vector<Essay> parse_asap_tsv(std::istream& in, std::optional<int> prompt_filter = std::nullopt,
                                  TextEncoding encoding = TextEncoding::windows1252);

std::vector<Essay> load_asap_tsv(const std::string& path,
                                 std::optional<int> prompt_filter = std::nullopt,
                                 TextEncoding encoding = TextEncoding::windows1252);

/// (raw - min) / (max - min). Throws ValidationError when raw is outside the range.
double scale_score(int raw, ScoreRange range);

/// Inverse of scale_score for regression output: round half up, then clamp.
int unscale_score(double unit, ScoreRange range);

/// Random partitions of a set of essays, one per repetition.
struct FoldPlan {
  int fold_count = 5;
  int repetitions = 1;
  std::uint64_t seed = 0;
  std::vector<std::string> essay_ids;
  /// assignment[rep][i] is the fold of essay_ids[i] in repetition rep.
  std::vector<std::vector<int>> assignment;

  /// Positions (into essay_ids) of the essays in `fold` for repetition `rep`, ascending.
  std::vector<std::size_t> members(int rep, int fold) const;
  /// Positions of every essay outside `fold`, ascending.
  std::vector<std::size_t> complement(int rep, int fold) const;
};

/// Each repetition shuffles with derive_seed(seed, rep) and deals essays
/// round-robin, so fold sizes differ by at most one and the first
/// (n mod fold_count) folds get the extra essay.
FoldPlan make_folds(std::span<const Essay> essays, int fold_count, int repetitions, std::uint64_t seed);

struct TransferSplit {
  std::vector<std::string> extra_train_ids;
  std::vector<std::string> eval_ids;
};

/// Splits target-domain essays into fold_count folds (one partition per
/// seed); repetition r evaluates on fold r mod fold_count and draws n_t
/// extra training essays without replacement from the remaining folds.
TransferSplit make_transfer_split(std::span<const Essay> target, int n_t, int repetition,
                                  std::uint64_t seed, int fold_count = 5);

/// Plain-text audit manifest: one "rep<TAB>fold<TAB>id" line per essay.
void write_fold_manifest(std::ostream& out, const FoldPlan& plan);
void write_transfer_manifest(std::ostream& out, int repetition, int n_t, const TransferSplit& split);

}  // namespace kaes
