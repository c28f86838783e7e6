#include "kaes/corpus.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "kaes/error.hpp"
#include "kaes/random.hpp"
#include "kaes/text.hpp"

namespace kaes {

namespace {

constexpr std::array<ScoreRange, kAsapPromptCount> kAsapRanges = {{
    {2, 12}, {1, 6}, {0, 3}, {0, 3}, {0, 4}, {0, 4}, {0, 30}, {0, 60},
}};

constexpr std::array<int, kAsapPromptCount> kAsapCounts = {1783, 1800, 1726, 1726,
                                                           1772, 1805, 1569, 723};

void check_prompt(int prompt) {
  if (prompt < 1 || prompt > kAsapPromptCount)
    throw ValidationError("prompt id " + std::to_string(prompt) + " outside 1.." +
                          std::to_string(kAsapPromptCount));
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<long long> parse_int(std::string_view s) {
  s = trim(s);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

// Some exports wrap the essay field in double quotes with "" escapes.
std::string unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    s = s.substr(1, s.size() - 2);
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      out.push_back(s[i]);
      if (s[i] == '"' && i + 1 < s.size() && s[i + 1] == '"') ++i;
    }
    return out;
  }
  return std::string(s);
}

}  // namespace

ScoreRange asap_score_range(int prompt) {
  check_prompt(prompt);
  return kAsapRanges[static_cast<std::size_t>(prompt - 1)];
}

int asap_essay_count(int prompt) {
  check_prompt(prompt);
  return kAsapCounts[static_cast<std::size_t>(prompt - 1)];
}

std::vector<Essay> parse_asap_tsv(std::istream& in, std::optional<int> prompt_filter,
                                  TextEncoding encoding) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("missing header row", 1);
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  // Strip a UTF-8 byte order mark.
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);

  const auto header = split_tabs(line);
  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) column.emplace(std::string(trim(header[i])), i);
  auto require = [&](const char* name) {
    const auto it = column.find(name);
    if (it == column.end()) throw ParseError(std::string("header lacks column ") + name, 1);
    return it->second;
  };
  const std::size_t c_id = require("essay_id");
  const std::size_t c_set = require("essay_set");
  const std::size_t c_text = require("essay");
  const std::size_t c_score = require("domain1_score");

  std::vector<Essay> essays;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " columns, found " +
                           std::to_string(fields.size()),
                       line_no);
    const auto set = parse_int(fields[c_set]);
    if (!set) throw ParseError("non-integer essay_set", line_no);
    const std::string id(trim(fields[c_id]));
    if (id.empty()) throw ParseError("empty essay_id", line_no);
    const int prompt = static_cast<int>(*set);
    if (prompt_filter && prompt != *prompt_filter) continue;
    if (prompt < 1 || prompt > kAsapPromptCount)
      throw ValidationError("essay " + id + ": essay_set " + std::to_string(prompt) +
                            " outside 1..8");
    const auto score = parse_int(fields[c_score]);
    if (!score) throw ParseError("non-integer domain1_score for essay " + id, line_no);
    const ScoreRange range = asap_score_range(prompt);
    if (!range.contains(static_cast<int>(*score)))
      throw ValidationError("essay " + id + ": score " + std::to_string(*score) +
                            " outside prompt " + std::to_string(prompt) + " range " +
                            std::to_string(range.min) + "-" + std::to_string(range.max));

    Essay e;
    e.id = id;
    e.prompt = prompt;
    const std::string raw = unquote(fields[c_text]);
    e.text = encoding == TextEncoding::windows1252 ? text::decode_windows1252(raw) : raw;
    e.raw_score = static_cast<int>(*score);
    e.unit_score = scale_score(e.raw_score, range);
    essays.push_back(std::move(e));
  }
  return essays;
}

std::vector<Essay> load_asap_tsv(const std::string& path, std::optional<int> prompt_filter,
                                 TextEncoding encoding) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open data file " + path);
  return parse_asap_tsv(in, prompt_filter, encoding);
}

double scale_score(int raw, ScoreRange range) {
  if (range.min >= range.max) throw ValidationError("degenerate score range");
  if (!range.contains(raw))
    throw ValidationError("score " + std::to_string(raw) + " outside range " +
                          std::to_string(range.min) + "-" + std::to_string(range.max));
  return static_cast<double>(raw - range.min) / static_cast<double>(range.max - range.min);
}

int unscale_score(double unit, ScoreRange range) {
  if (std::isnan(unit)) return range.min;
  const double raw = unit * static_cast<double>(range.max - range.min) + range.min;
  const double rounded = std::floor(raw + 0.5);
  if (rounded <= range.min) return range.min;
  if (rounded >= range.max) return range.max;
  return static_cast<int>(rounded);
}

std::vector<std::size_t> FoldPlan::members(int rep, int fold) const {
  std::vector<std::size_t> out;
  const auto& a = assignment.at(static_cast<std::size_t>(rep));
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] == fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldPlan::complement(int rep, int fold) const {
  std::vector<std::size_t> out;
  const auto& a = assignment.at(static_cast<std::size_t>(rep));
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != fold) out.push_back(i);
  return out;
}

FoldPlan make_folds(std::span<const Essay> essays, int fold_count, int repetitions,
                    std::uint64_t seed) {
  if (fold_count < 1) throw ValidationError("fold_count must be >= 1");
  if (repetitions < 1) throw ValidationError("repetitions must be >= 1");
  if (essays.size() < static_cast<std::size_t>(fold_count))
    throw ValidationError("cannot split " + std::to_string(essays.size()) + " essays into " +
                          std::to_string(fold_count) + " folds");
  FoldPlan plan;
  plan.fold_count = fold_count;
  plan.repetitions = repetitions;
  plan.seed = seed;
  for (const auto& e : essays) plan.essay_ids.push_back(e.id);

  const std::size_t n = essays.size();
  for (int rep = 0; rep < repetitions; ++rep) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(rep)));
    shuffle(std::span(order), rng);
    std::vector<int> fold_of(n);
    for (std::size_t pos = 0; pos < n; ++pos)
      fold_of[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(fold_count));
    plan.assignment.push_back(std::move(fold_of));
  }
  return plan;
}

TransferSplit make_transfer_split(std::span<const Essay> target, int n_t, int repetition,
                                  std::uint64_t seed, int fold_count) {
  if (n_t < 0) throw ValidationError("n_t must be non-negative");
  if (repetition < 0) throw ValidationError("repetition must be non-negative");
  const FoldPlan plan = make_folds(target, fold_count, 1, seed);
  const int eval_fold = repetition % fold_count;
  const auto eval = plan.members(0, eval_fold);
  auto pool = plan.complement(0, eval_fold);
  if (static_cast<std::size_t>(n_t) > pool.size())
    throw ValidationError("n_t = " + std::to_string(n_t) + " exceeds the " +
                          std::to_string(pool.size()) + " essays outside the evaluation fold");

  Rng rng(derive_seed(derive_seed(seed, 0x7472616E73666572ULL), static_cast<std::uint64_t>(repetition)));
  // Partial Fisher-Yates: the first n_t slots become the sample.
  for (std::size_t i = 0; i < static_cast<std::size_t>(n_t); ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_index(rng, pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(n_t));
  std::sort(pool.begin(), pool.end());

  TransferSplit split;
  for (const auto i : pool) split.extra_train_ids.push_back(target[i].id);
  for (const auto i : eval) split.eval_ids.push_back(target[i].id);
  return split;
}

void write_fold_manifest(std::ostream& out, const FoldPlan& plan) {
  out << "# folds=" << plan.fold_count << " repetitions=" << plan.repetitions
      << " seed=" << plan.seed << "\n";
  out << "repetition\tfold\tessay_id\n";
  for (int rep = 0; rep < plan.repetitions; ++rep)
    for (int fold = 0; fold < plan.fold_count; ++fold)
      for (const auto i : plan.members(rep, fold))
        out << rep << '\t' << fold << '\t' << plan.essay_ids[i] << '\n';
}

void write_transfer_manifest(std::ostream& out, int repetition, int n_t, const TransferSplit& split) {
  for (const auto& id : split.extra_train_ids)
    out << repetition << "\tn_t=" << n_t << "\ttrain\t" << id << '\n';
  for (const auto& id : split.eval_ids) out << repetition << "\tn_t=" << n_t << "\teval\t" << id << '\n';
}

}  // namespace kaes
