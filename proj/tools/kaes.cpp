// kaes: command-line front end.
//
//   kaes synth            write a synthetic TSV + word2vec file
//   kaes ingest           validate a TSV, print per-prompt counts, fold manifests
//   kaes codebook         fit a BOSWE codebook on one prompt
//   kaes kernel           build a kernel matrix file
//   kaes train            train nu-SVR on a kernel file
//   kaes predict          apply a model to a test x train kernel file
//   kaes eval-indomain    5-fold protocol, report table
//   kaes eval-crossdomain source -> target protocol, report table
//   kaes report           re-render a csv report
//
// Every subcommand accepts --config FILE with key=value lines; keys are
// long option names without the dashes. Command-line flags win.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "kaes/boswe.hpp"
#include "kaes/corpus.hpp"
#include "kaes/error.hpp"
#include "kaes/fusion.hpp"
#include "kaes/harness.hpp"
#include "kaes/metrics.hpp"
#include "kaes/random.hpp"
#include "kaes/string_kernel.hpp"
#include "kaes/svr.hpp"
#include "kaes/synthetic.hpp"

using namespace kaes;

namespace {

// Turns "--config FILE" into "--key value" tokens placed right after the
// subcommand name, ahead of the user's own flags, so the flags take effect last.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::vector<std::string> injected;
  for (std::size_t i = 0; i < args.size();) {
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<long>(i));
    } else {
      ++i;
      continue;
    }
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ParseError("config line is not key=value", line_no);
      auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
      };
      const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
      if (key.empty()) throw ParseError("config line has an empty key", line_no);
      injected.push_back("--" + key);
      injected.push_back(value);
    }
  }
  if (!args.empty()) args.insert(args.begin() + 1, injected.begin(), injected.end());
  args.insert(args.begin(), argv[0]);
  return args;
}

struct Common {
  std::string data;
  std::string embeddings;
  std::vector<int> prompts;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::size_t vocab_limit = kDefaultVocabLimit;
  int ngram_min = 1;
  int ngram_max = 15;
  int k = 500;
  int kmeans_max_iters = 100;
  double c = 1000.0;
  double nu = 0.1;
  double kkt = 1e-3;
  std::string scaling = "libsvm";
  std::string format = "text";
  std::string output;
  bool verbose = false;
};

void add_data(CLI::App* app, Common& o, bool required = true) {
  auto* opt = app->add_option("--data", o.data, "ASAP-style training TSV");
  if (required) opt->required();
}
void add_embeddings(CLI::App* app, Common& o) {
  app->add_option("--embeddings", o.embeddings, "word2vec binary file");
  app->add_option("--vocab-limit", o.vocab_limit, "load at most this many embedding entries");
}
void add_ngrams(CLI::App* app, Common& o) {
  app->add_option("--ngram-min", o.ngram_min, "shortest character n-gram");
  app->add_option("--ngram-max", o.ngram_max, "longest character n-gram");
}
void add_svr(CLI::App* app, Common& o) {
  app->add_option("--c", o.c, "SVR regularization");
  app->add_option("--nu", o.nu, "SVR nu in (0, 1]");
  app->add_option("--kkt-tolerance", o.kkt, "SMO stopping tolerance");
  app->add_option("--scaling", o.scaling, "dual box convention: libsvm or per-sample")
      ->check(CLI::IsMember({"libsvm", "per-sample"}));
}
void add_kmeans(CLI::App* app, Common& o) {
  app->add_option("--k", o.k, "codebook size");
  app->add_option("--kmeans-max-iters", o.kmeans_max_iters, "Lloyd iteration cap");
}

SvrConfig svr_config(const Common& o) {
  SvrConfig cfg;
  cfg.c = o.c;
  cfg.nu = o.nu;
  cfg.kkt_tolerance = o.kkt;
  cfg.scaling = o.scaling == "per-sample" ? BoundScaling::per_sample : BoundScaling::libsvm;
  return cfg;
}

std::ostream& output_stream(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path, std::ios::binary);
  if (!file) throw Error("cannot open " + path + " for writing");
  return file;
}

std::vector<Essay> load_prompt(const Common& o, int prompt) {
  auto essays = load_asap_tsv(o.data, prompt);
  if (essays.empty()) throw ValidationError("no essays for prompt " + std::to_string(prompt) + " in " + o.data);
  return essays;
}

std::vector<std::string> read_ids(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open id list " + path);
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) ids.push_back(line);
  }
  return ids;
}

std::vector<const Essay*> select(const std::vector<Essay>& essays, const std::vector<std::string>& ids) {
  std::map<std::string, const Essay*> by_id;
  for (const auto& e : essays) by_id[e.id] = &e;
  std::vector<const Essay*> out;
  for (const auto& id : ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw ValidationError("essay id " + id + " not found in the data");
    out.push_back(it->second);
  }
  return out;
}

void write_tsv(std::ostream& out, const std::vector<Essay>& essays) {
  out << "essay_id\tessay_set\tessay\tdomain1_score\n";
  for (const auto& e : essays) out << e.id << '\t' << e.prompt << '\t' << e.text << '\t' << e.raw_score << '\n';
}

int cmd_synth(const std::string& dir, std::size_t count, const std::vector<int>& prompts, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  std::vector<Essay> all;
  std::optional<EmbeddingModel> vectors;
  for (const int p : prompts) {
    SyntheticOptions opt;
    opt.prompt = p;
    auto corpus = make_synthetic_corpus(count, derive_seed(seed, static_cast<std::uint64_t>(p)), opt);
    all.insert(all.end(), corpus.essays.begin(), corpus.essays.end());
    // Each prompt draws its own filler words; keep every vector.
    if (!vectors) vectors.emplace(corpus.embeddings.dim());
    for (std::size_t w = 0; w < corpus.embeddings.size(); ++w)
      vectors->add(corpus.embeddings.words()[w], corpus.embeddings.vector(w));
  }
  std::ofstream tsv(dir + "/train.tsv", std::ios::binary);
  write_tsv(tsv, all);
  std::ofstream bin(dir + "/vectors.bin", std::ios::binary);
  write_word2vec_binary(bin, *vectors);
  std::cout << "wrote " << all.size() << " essays to " << dir << "/train.tsv and " << vectors->size()
            << " vectors to " << dir << "/vectors.bin\n";
  return 0;
}

int cmd_ingest(const Common& o, int folds, int repetitions, const std::string& manifest) {
  const auto essays = load_asap_tsv(o.data);
  std::map<int, std::vector<Essay>> by_prompt;
  for (const auto& e : essays) by_prompt[e.prompt].push_back(e);
  std::printf("%-6s %7s %9s %9s\n", "prompt", "essays", "range", "expected");
  for (const auto& [p, list] : by_prompt) {
    const auto r = asap_score_range(p);
    char range[16];
    std::snprintf(range, sizeof range, "%d-%d", r.min, r.max);
    std::printf("%-6d %7zu %9s %9d\n", p, list.size(), range, asap_essay_count(p));
  }
  if (!manifest.empty()) {
    std::ofstream out(manifest);
    if (!out) throw Error("cannot open " + manifest + " for writing");
    for (const auto& [p, list] : by_prompt) {
      if (!o.prompts.empty() && std::find(o.prompts.begin(), o.prompts.end(), p) == o.prompts.end()) continue;
      out << "# prompt " << p << '\n';
      write_fold_manifest(out, make_folds(list, folds, repetitions, derive_seed(o.seed, 0x100 + p)));
    }
  }
  return 0;
}

std::vector<float> token_type_vectors(const std::vector<const Essay*>& essays, const EmbeddingModel& model) {
  std::vector<float> out;
  std::set<std::size_t> seen;
  for (const auto* e : essays)
    for (const auto& tok : tokenize(e->text)) {
      const auto idx = model.index(tok);
      if (!idx || !seen.insert(*idx).second) continue;
      const auto v = model.vector(*idx);
      out.insert(out.end(), v.begin(), v.end());
    }
  return out;
}

std::vector<const Essay*> all_of(const std::vector<Essay>& essays) {
  std::vector<const Essay*> out;
  for (const auto& e : essays) out.push_back(&e);
  return out;
}

int cmd_codebook(const Common& o, const std::string& ids_path, const std::string& out_path) {
  if (o.prompts.size() != 1) throw ValidationError("codebook needs exactly one --prompt");
  if (o.embeddings.empty()) throw ValidationError("codebook needs --embeddings");
  const auto essays = load_prompt(o, o.prompts[0]);
  const auto model = load_word2vec_binary_file(o.embeddings, o.vocab_limit);
  const auto docs = ids_path.empty() ? all_of(essays) : select(essays, read_ids(ids_path));
  KMeansOptions km;
  km.k = o.k;
  km.seed = o.seed;
  km.max_iters = o.kmeans_max_iters;
  km.threads = o.threads;
  const auto vectors = token_type_vectors(docs, model);
  const auto book = fit_codebook(vectors, model.dim(), km);
  save_codebook(out_path, book);
  std::printf("codebook k=%d dim=%zu types=%zu iterations=%d converged=%d distortion=%.6g -> %s\n", book.k(),
              book.dim(), vectors.size() / model.dim(), book.iterations, book.converged ? 1 : 0, book.distortion,
              out_path.c_str());
  return 0;
}

int cmd_kernel(const Common& o, const std::string& representation, const std::string& codebook_path,
               const std::string& row_ids_path, const std::string& col_ids_path, bool raw,
               const std::string& out_path) {
  if (o.prompts.size() != 1) throw ValidationError("kernel needs exactly one --prompt");
  const Representation rep = parse_representation(representation);
  const auto essays = load_prompt(o, o.prompts[0]);
  const auto rows = row_ids_path.empty() ? all_of(essays) : select(essays, read_ids(row_ids_path));
  const auto cols = col_ids_path.empty() ? rows : select(essays, read_ids(col_ids_path));
  const bool square = row_ids_path == col_ids_path || col_ids_path.empty();
  std::vector<std::string> rids, cids;
  for (const auto* e : rows) rids.push_back(e->id);
  for (const auto* e : cols) cids.push_back(e->id);

  auto hisk = [&] {
    const NGramRange range{o.ngram_min, o.ngram_max};
    auto profile = [&](const std::vector<const Essay*>& list) {
      std::vector<NGramProfile> p;
      for (const auto* e : list) p.push_back(NGramProfile(normalize_text(e->text), range));
      return p;
    };
    const auto rp = profile(rows);
    KernelMatrix k = square ? gram_matrix(rp, rids, o.threads) : kernel_matrix(rp, rids, profile(cols), cids, o.threads);
    return raw ? k : normalize_kernel(k);
  };
  auto boswe = [&] {
    if (codebook_path.empty() || o.embeddings.empty())
      throw ValidationError("boswe kernels need --codebook and --embeddings");
    const auto model = load_word2vec_binary_file(o.embeddings, o.vocab_limit);
    const auto book = load_codebook(codebook_path);
    auto hist = [&](const std::vector<const Essay*>& list) {
      std::vector<BosweHistogram> h;
      for (const auto* e : list) h.push_back(build_histogram(book, tokenize(e->text), model));
      return h;
    };
    const auto rh = hist(rows);
    return square ? boswe_gram_matrix(rh, rids, o.threads) : boswe_kernel_matrix(rh, rids, hist(cols), cids, o.threads);
  };

  KernelMatrix k;
  switch (rep) {
    case Representation::hisk: k = hisk(); break;
    case Representation::boswe: k = boswe(); break;
    case Representation::fused: k = sum_kernels(hisk(), boswe()); break;
  }
  save_kernel_cache(out_path, k);
  std::printf("kernel %s %zux%zu -> %s\n", std::string(to_string(k.kind)).c_str(), k.rows, k.cols, out_path.c_str());
  return 0;
}

std::map<std::string, const Essay*> index_by_id(const std::vector<Essay>& essays) {
  std::map<std::string, const Essay*> m;
  for (const auto& e : essays) m[e.id] = &e;
  return m;
}

int cmd_train(const Common& o, const std::string& kernel_path, const std::string& out_path) {
  const auto k = load_kernel_cache(kernel_path);
  const auto essays = load_asap_tsv(o.data);
  const auto by_id = index_by_id(essays);
  std::vector<double> y;
  for (const auto& id : k.row_ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw ValidationError("kernel row " + id + " is not in " + o.data);
    y.push_back(it->second->unit_score);
  }
  const auto model = train_nu_svr(k, y, svr_config(o), o.seed);
  save_svr_model(out_path, model);
  std::printf("model rows=%zu support=%zu bias=%.6f epsilon=%.6f iterations=%llu%s -> %s\n", model.train_ids.size(),
              model.support_ids().size(), model.bias, model.epsilon_star,
              static_cast<unsigned long long>(model.iterations), model.warning() ? " (hit max_iterations)" : "",
              out_path.c_str());
  return model.warning() ? 3 : 0;
}

int cmd_predict(const Common& o, const std::string& model_path, const std::string& kernel_path) {
  if (o.prompts.size() != 1) throw ValidationError("predict needs exactly one --prompt for the score range");
  const auto model = load_svr_model(model_path);
  const auto k = load_kernel_cache(kernel_path);
  const auto range = asap_score_range(o.prompts[0]);
  const auto unit = predict(model, k);
  std::ofstream file;
  std::ostream& out = output_stream(o.output, file);
  std::vector<int> pred, gold;
  std::map<std::string, const Essay*> by_id;
  std::vector<Essay> essays;
  if (!o.data.empty()) {
    essays = load_asap_tsv(o.data);
    by_id = index_by_id(essays);
  }
  out << "id\tunit\tscore\n";
  char buf[64];
  for (std::size_t i = 0; i < unit.size(); ++i) {
    const int s = unscale_score(unit[i], range);
    std::snprintf(buf, sizeof buf, "\t%.6f\t%d\n", unit[i], s);
    out << k.row_ids[i] << buf;
    const auto it = by_id.find(k.row_ids[i]);
    if (it != by_id.end()) {
      pred.push_back(s);
      gold.push_back(it->second->raw_score);
    }
  }
  if (!pred.empty() && pred.size() == unit.size()) write_qwk_block(std::cerr, qwk(pred, gold, range));
  return 0;
}

ExperimentConfig experiment(const Common& o, Mode mode, const std::vector<std::string>& reps) {
  ExperimentConfig cfg;
  cfg.mode = mode;
  cfg.representations.clear();
  for (const auto& r : reps) cfg.representations.push_back(parse_representation(r));
  cfg.prompts = o.prompts;
  cfg.ngrams = {o.ngram_min, o.ngram_max};
  cfg.k = o.k;
  cfg.kmeans_max_iters = o.kmeans_max_iters;
  cfg.svr = svr_config(o);
  cfg.seed = o.seed;
  cfg.data_path = o.data;
  cfg.embeddings_path = o.embeddings;
  cfg.vocab_limit = o.vocab_limit;
  cfg.threads = o.threads;
  if (o.verbose) cfg.log = [](const std::string& m) { std::cerr << m << '\n'; };
  return cfg;
}

int emit(const Common& o, const ResultTable& table) {
  std::ofstream file;
  output_stream(o.output, file) << emit_report(table, parse_report_format(o.format));
  std::size_t failed = 0;
  for (const auto& c : table.cells) failed += !c.ok();
  return failed > 0 ? 4 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Essay scoring with string kernels and word embeddings"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  Common o;

  auto* synth = app.add_subcommand("synth", "write a synthetic corpus and matching word vectors");
  std::string synth_dir;
  std::size_t synth_count = 200;
  std::vector<int> synth_prompts{1};
  synth->add_option("--out-dir", synth_dir, "output directory")->required();
  synth->add_option("--count", synth_count, "essays per prompt");
  synth->add_option("--prompts", synth_prompts, "prompt ids")->delimiter(',')->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  synth->add_option("--seed", o.seed, "generator seed");

  auto* ingest = app.add_subcommand("ingest", "validate a TSV and optionally write fold manifests");
  int folds = 5, repetitions = 10;
  std::string manifest;
  add_data(ingest, o);
  ingest->add_option("--prompt", o.prompts, "restrict manifests to these prompts")->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  ingest->add_option("--folds", folds, "folds per repetition");
  ingest->add_option("--repetitions", repetitions, "repetitions");
  ingest->add_option("--seed", o.seed, "root seed");
  ingest->add_option("--manifest", manifest, "write rep/fold/id lines here");

  auto* codebook = app.add_subcommand("codebook", "fit a BOSWE codebook on the token types of one prompt");
  std::string ids_path, out_path;
  add_data(codebook, o);
  add_embeddings(codebook, o);
  add_kmeans(codebook, o);
  codebook->add_option("--prompt", o.prompts, "prompt id")->required();
  codebook->add_option("--ids", ids_path, "fit only on these essay ids (one per line)");
  codebook->add_option("--seed", o.seed, "k-means seed");
  codebook->add_option("--threads", o.threads, "worker threads (0 = all cores)");
  codebook->add_option("--out", out_path, "codebook file")->required();

  auto* kernel = app.add_subcommand("kernel", "compute a kernel matrix over one prompt");
  std::string representation = "hisk", codebook_path, row_ids, col_ids;
  bool raw = false;
  add_data(kernel, o);
  add_embeddings(kernel, o);
  add_ngrams(kernel, o);
  kernel->add_option("--prompt", o.prompts, "prompt id")->required();
  kernel->add_option("--representation", representation, "hisk, boswe or fused");
  kernel->add_option("--codebook", codebook_path, "codebook file for boswe/fused");
  kernel->add_option("--rows", row_ids, "row essay ids (default: whole prompt)");
  kernel->add_option("--cols", col_ids, "column essay ids (default: same as rows)");
  kernel->add_flag("--raw", raw, "skip HISK normalization");
  kernel->add_option("--threads", o.threads, "worker threads (0 = all cores)");
  kernel->add_option("--out", out_path, "kernel file")->required();

  auto* train = app.add_subcommand("train", "train nu-SVR on a square kernel file");
  std::string kernel_path, model_path;
  add_data(train, o);
  add_svr(train, o);
  train->add_option("--kernel", kernel_path, "training kernel file")->required();
  train->add_option("--seed", o.seed, "recorded in the model");
  train->add_option("--out", out_path, "model file")->required();

  auto* pred = app.add_subcommand("predict", "score the rows of a test x train kernel file");
  add_data(pred, o, false);
  pred->add_option("--model", model_path, "model file")->required();
  pred->add_option("--kernel", kernel_path, "test x train kernel file")->required();
  pred->add_option("--prompt", o.prompts, "prompt whose score range applies")->required();
  pred->add_option("--output", o.output, "write predictions here (default stdout)");

  std::vector<std::string> reps{"fused"};
  std::vector<int> n_t_values{0, 10, 25, 50, 100};
  int sources = 0, targets = 0;
  std::string cache_dir;
  auto add_eval = [&](CLI::App* sub) {
    add_data(sub, o);
    add_embeddings(sub, o);
    add_ngrams(sub, o);
    add_kmeans(sub, o);
    add_svr(sub, o);
    sub->add_option("--representation", reps, "hisk, boswe, fused (repeatable)")
        ->delimiter(',')
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    sub->add_option("--seed", o.seed, "root seed");
    sub->add_option("--folds", folds, "folds");
    sub->add_option("--cache-dir", cache_dir, "reuse HISK Gram matrices across runs");
    sub->add_option("--threads", o.threads, "worker threads (0 = all cores)");
    sub->add_option("--format", o.format, "text or csv")->check(CLI::IsMember({"text", "csv"}));
    sub->add_option("--output", o.output, "write the report here (default stdout)");
    sub->add_flag("--verbose", o.verbose, "progress and OOV statistics on stderr");
  };
  auto* indomain = app.add_subcommand("eval-indomain", "in-domain cross-validation");
  int eval_reps = 0;
  add_eval(indomain);
  indomain->add_option("--prompt", o.prompts, "prompt ids (default: all in the data)")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  indomain->add_option("--repetitions", eval_reps, "repetitions (default 10)");

  auto* cross = app.add_subcommand("eval-crossdomain", "source -> target transfer");
  add_eval(cross);
  cross->add_option("--source", sources, "source prompt (default: the four standard pairs)");
  cross->add_option("--target", targets, "target prompt");
  cross->add_option("--n-t", n_t_values, "target sub-sample sizes")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  cross->add_option("--repetitions", eval_reps, "repetitions (default 5)");

  auto* report = app.add_subcommand("report", "re-render a csv report");
  std::string input;
  report->add_option("--input", input, "csv report")->required();
  report->add_option("--format", o.format, "text or csv")->check(CLI::IsMember({"text", "csv"}));
  report->add_option("--output", o.output, "write here (default stdout)");

  try {
    auto args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    args.pop_back();  // program name
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "kaes: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*synth) return cmd_synth(synth_dir, synth_count, synth_prompts, o.seed);
    if (*ingest) return cmd_ingest(o, folds, repetitions, manifest);
    if (*codebook) return cmd_codebook(o, ids_path, out_path);
    if (*kernel) return cmd_kernel(o, representation, codebook_path, row_ids, col_ids, raw, out_path);
    if (*train) return cmd_train(o, kernel_path, out_path);
    if (*pred) return cmd_predict(o, model_path, kernel_path);
    if (*indomain) {
      auto cfg = experiment(o, Mode::in_domain, reps);
      cfg.folds = folds;
      cfg.repetitions = eval_reps;
      cfg.cache_dir = cache_dir;
      return emit(o, run_in_domain(cfg).table);
    }
    if (*cross) {
      auto cfg = experiment(o, Mode::cross_domain, reps);
      cfg.folds = folds;
      cfg.repetitions = eval_reps;
      cfg.cache_dir = cache_dir;
      cfg.n_t_values = n_t_values;
      if (sources != 0 || targets != 0) {
        if (sources == 0 || targets == 0) throw ValidationError("--source and --target go together");
        cfg.pairs = {{sources, targets}};
      }
      return emit(o, run_cross_domain(cfg).table);
    }
    if (*report) {
      std::ifstream in(input);
      if (!in) throw Error("cannot open " + input);
      std::ofstream file;
      output_stream(o.output, file) << emit_report(parse_report_csv(in), parse_report_format(o.format));
      return 0;
    }
  } catch (const ParseError& e) {
    std::cerr << "kaes: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "kaes: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
