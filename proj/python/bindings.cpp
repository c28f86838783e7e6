#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <map>

#include "kaes/boswe.hpp"
#include "kaes/corpus.hpp"
#include "kaes/error.hpp"
#include "kaes/fusion.hpp"
#include "kaes/harness.hpp"
#include "kaes/metrics.hpp"
#include "kaes/string_kernel.hpp"
#include "kaes/svr.hpp"
#include "kaes/synthetic.hpp"
#include "kaes/text.hpp"

namespace py = pybind11;
using namespace kaes;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<std::string> default_ids(std::size_t n, const std::optional<std::vector<std::string>>& ids) {
  if (ids) {
    if (ids->size() != n) throw ValidationError("got " + std::to_string(ids->size()) + " ids for " +
                                                std::to_string(n) + " documents");
    return *ids;
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::to_string(i));
  return out;
}

std::vector<NGramProfile> profiles(const std::vector<std::string>& texts, NGramRange range) {
  std::vector<NGramProfile> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.emplace_back(normalize_text(t), range);
  return out;
}

py::array_t<double> values_of(const KernelMatrix& k) {
  py::array_t<double> a({k.rows, k.cols});
  std::copy(k.values.begin(), k.values.end(), a.mutable_data());
  return a;
}

KernelMatrix from_numpy(const DoubleArray& a, std::optional<std::vector<std::string>> row_ids,
                        std::optional<std::vector<std::string>> col_ids, const std::string& kind) {
  if (a.ndim() != 2) throw ValidationError("kernel matrix must be 2-dimensional");
  const auto rows = static_cast<std::size_t>(a.shape(0)), cols = static_cast<std::size_t>(a.shape(1));
  auto rids = default_ids(rows, row_ids);
  auto cids = col_ids ? default_ids(cols, col_ids) : (rows == cols ? rids : default_ids(cols, std::nullopt));
  static const std::map<std::string, KernelKind> kinds{{"hisk-raw", KernelKind::hisk_raw},
                                                       {"hisk-normalized", KernelKind::hisk_normalized},
                                                       {"boswe", KernelKind::boswe},
                                                       {"fused", KernelKind::fused},
                                                       {"linear", KernelKind::linear}};
  const auto it = kinds.find(kind);
  if (it == kinds.end()) throw ValidationError("unknown kernel kind '" + kind + "'");
  KernelMatrix k(std::move(rids), std::move(cids), it->second);
  std::copy(a.data(), a.data() + rows * cols, k.values.begin());
  if (k.is_square()) {
    for (std::size_t i = 0; i < rows; ++i) k.diag_rows.push_back(k.at(i, i));
    k.diag_cols = k.diag_rows;
  }
  return k;
}

SparseFeatureMatrix dense_features(const DoubleArray& a, std::optional<std::vector<std::string>> ids) {
  if (a.ndim() != 2) throw ValidationError("feature matrix must be 2-dimensional");
  const auto rows = static_cast<std::size_t>(a.shape(0)), cols = static_cast<std::size_t>(a.shape(1));
  std::vector<double> v(a.data(), a.data() + rows * cols);
  return SparseFeatureMatrix::from_dense(v, rows, cols, default_ids(rows, ids));
}

py::dict essay_dict(const Essay& e) {
  py::dict d;
  d["id"] = e.id;
  d["prompt"] = e.prompt;
  d["text"] = e.text;
  d["raw_score"] = e.raw_score;
  d["unit_score"] = e.unit_score;
  return d;
}

Essay essay_from(const py::handle& h) {
  Essay e;
  const auto d = h.cast<py::dict>();
  e.id = d["id"].cast<std::string>();
  e.prompt = d["prompt"].cast<int>();
  e.text = d["text"].cast<std::string>();
  e.raw_score = d["raw_score"].cast<int>();
  e.unit_score = d.contains("unit_score") ? d["unit_score"].cast<double>()
                                          : scale_score(e.raw_score, asap_score_range(e.prompt));
  return e;
}

Dataset dataset_from(const py::iterable& essays, std::optional<EmbeddingModel> embeddings) {
  Dataset d;
  for (const auto& h : essays) d.essays.push_back(essay_from(h));
  d.embeddings = std::move(embeddings);
  return d;
}

}  // namespace

PYBIND11_MODULE(_kaes, m) {
  m.doc() = "String kernels, bag of super word embeddings and nu-SVR for essay scoring";

  // Translators run newest first, so the base class goes in first.
  py::register_exception<Error>(m, "KaesError", PyExc_RuntimeError);
  const py::object base = m.attr("KaesError");
  py::register_exception<ValidationError>(m, "ValidationError", base);
  py::register_exception<ParseError>(m, "ParseError", base);
  py::register_exception<FormatError>(m, "FormatError", base);

  // corpus
  py::class_<ScoreRange>(m, "ScoreRange")
      .def(py::init<int, int>(), py::arg("min"), py::arg("max"))
      .def_readwrite("min", &ScoreRange::min)
      .def_readwrite("max", &ScoreRange::max)
      .def("levels", &ScoreRange::levels)
      .def("__repr__", [](const ScoreRange& r) {
        return "ScoreRange(" + std::to_string(r.min) + ", " + std::to_string(r.max) + ")";
      });
  m.def("asap_score_range", &asap_score_range, py::arg("prompt"));
  m.def("scale_score", &scale_score, py::arg("raw"), py::arg("range"));
  m.def("unscale_score", &unscale_score, py::arg("unit"), py::arg("range"));
  m.def(
      "load_asap_tsv",
      [](const std::string& path, std::optional<int> prompt, bool utf8) {
        py::list out;
        for (const auto& e : load_asap_tsv(path, prompt, utf8 ? TextEncoding::utf8 : TextEncoding::windows1252))
          out.append(essay_dict(e));
        return out;
      },
      py::arg("path"), py::arg("prompt") = std::nullopt, py::arg("utf8") = false);
  m.def(
      "make_folds",
      [](const py::iterable& essays, int folds, int repetitions, std::uint64_t seed) {
        std::vector<Essay> list;
        for (const auto& h : essays) list.push_back(essay_from(h));
        const auto plan = make_folds(list, folds, repetitions, seed);
        return plan.assignment;
      },
      py::arg("essays"), py::arg("folds") = 5, py::arg("repetitions") = 1, py::arg("seed") = 0,
      "Fold index of every essay, one list per repetition.");

  // string kernel
  m.def(
      "normalize_text", [](const std::string& s) { return text::u32_to_utf8(normalize_text(s)); }, py::arg("text"));
  m.def(
      "ngram_counts",
      [](const std::string& s, int n_min, int n_max) {
        std::map<std::string, std::uint32_t> out;
        for (const auto& [g, n] : extract_ngram_counts(s, n_min, n_max).items()) out[text::u32_to_utf8(g)] = n;
        return out;
      },
      py::arg("text"), py::arg("n_min") = 1, py::arg("n_max") = 15);
  m.def(
      "hisk",
      [](const std::string& a, const std::string& b, int n_min, int n_max) {
        return hisk_pair(extract_ngram_counts(a, n_min, n_max), extract_ngram_counts(b, n_min, n_max));
      },
      py::arg("a"), py::arg("b"), py::arg("n_min") = 1, py::arg("n_max") = 15);

  py::class_<KernelMatrix>(m, "KernelMatrix")
      .def_readonly("rows", &KernelMatrix::rows)
      .def_readonly("cols", &KernelMatrix::cols)
      .def_readonly("row_ids", &KernelMatrix::row_ids)
      .def_readonly("col_ids", &KernelMatrix::col_ids)
      .def_property_readonly("kind", [](const KernelMatrix& k) { return std::string(to_string(k.kind)); })
      .def_property_readonly("values", &values_of)
      .def("is_square", &KernelMatrix::is_square)
      .def("trace", &KernelMatrix::trace)
      .def("save", [](const KernelMatrix& k, const std::string& path) { save_kernel_cache(path, k); })
      .def("__repr__", [](const KernelMatrix& k) {
        return "KernelMatrix(" + std::string(to_string(k.kind)) + ", " + std::to_string(k.rows) + "x" +
               std::to_string(k.cols) + ")";
      });
  m.def("kernel_from_array", &from_numpy, py::arg("values"), py::arg("row_ids") = std::nullopt,
        py::arg("col_ids") = std::nullopt, py::arg("kind") = "linear");
  m.def("load_kernel", &load_kernel_cache, py::arg("path"));
  m.def(
      "hisk_gram",
      [](const std::vector<std::string>& texts, std::optional<std::vector<std::string>> ids, int n_min, int n_max,
         bool normalize, unsigned threads) {
        const auto p = profiles(texts, {n_min, n_max});
        const auto k = gram_matrix(p, default_ids(texts.size(), ids), threads);
        return normalize ? normalize_kernel(k) : k;
      },
      py::arg("texts"), py::arg("ids") = std::nullopt, py::arg("n_min") = 1, py::arg("n_max") = 15,
      py::arg("normalize") = true, py::arg("threads") = 0, py::call_guard<py::gil_scoped_release>());
  m.def(
      "hisk_kernel",
      [](const std::vector<std::string>& rows, const std::vector<std::string>& cols,
         std::optional<std::vector<std::string>> row_ids, std::optional<std::vector<std::string>> col_ids, int n_min,
         int n_max, bool normalize, unsigned threads) {
        const NGramRange range{n_min, n_max};
        const auto k = kernel_matrix(profiles(rows, range), default_ids(rows.size(), row_ids), profiles(cols, range),
                                     default_ids(cols.size(), col_ids), threads);
        return normalize ? normalize_kernel(k) : k;
      },
      py::arg("rows"), py::arg("cols"), py::arg("row_ids") = std::nullopt, py::arg("col_ids") = std::nullopt,
      py::arg("n_min") = 1, py::arg("n_max") = 15, py::arg("normalize") = true, py::arg("threads") = 0,
      py::call_guard<py::gil_scoped_release>());
  m.def("normalize_kernel", &normalize_kernel, py::arg("kernel"));

  // embeddings
  py::class_<EmbeddingModel>(m, "EmbeddingModel")
      .def(py::init<std::size_t>(), py::arg("dim"))
      .def_property_readonly("dim", &EmbeddingModel::dim)
      .def("__len__", &EmbeddingModel::size)
      .def_property_readonly("words", &EmbeddingModel::words)
      .def(
          "add",
          [](EmbeddingModel& e, const std::string& w, const FloatArray& v) {
            if (static_cast<std::size_t>(v.size()) != e.dim()) throw ValidationError("vector length differs from dim");
            e.add(w, std::span<const float>(v.data(), e.dim()));
          },
          py::arg("word"), py::arg("vector"))
      .def(
          "__getitem__",
          [](const EmbeddingModel& e, const std::string& w) -> py::object {
            const auto v = lookup(e, w);
            if (!v) return py::none();
            py::array_t<float> a(static_cast<py::ssize_t>(v->size()));
            std::copy(v->begin(), v->end(), a.mutable_data());
            return std::move(a);
          },
          py::arg("word"))
      .def("__contains__", [](const EmbeddingModel& e, const std::string& w) { return e.index(w).has_value(); })
      .def("save", [](const EmbeddingModel& e, const std::string& path) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot open " + path + " for writing");
        write_word2vec_binary(out, e);
      });
  m.def("load_word2vec", &load_word2vec_binary_file, py::arg("path"), py::arg("vocab_limit") = std::nullopt);
  m.def("tokenize", &tokenize, py::arg("text"));

  // boswe
  py::class_<Codebook>(m, "Codebook")
      .def_property_readonly("k", &Codebook::k)
      .def_property_readonly("dim", &Codebook::dim)
      .def_property_readonly("seed", &Codebook::seed)
      .def_property_readonly("centroids",
                             [](const Codebook& c) {
                               py::array_t<float> a({static_cast<std::size_t>(c.k()), c.dim()});
                               std::copy(c.centroids().begin(), c.centroids().end(), a.mutable_data());
                               return a;
                             })
      .def_readonly("distortion", &Codebook::distortion)
      .def_readonly("distortion_trace", &Codebook::distortion_trace)
      .def_readonly("iterations", &Codebook::iterations)
      .def_readonly("converged", &Codebook::converged)
      .def(
          "assign",
          [](const Codebook& c, const FloatArray& v) {
            if (static_cast<std::size_t>(v.size()) != c.dim()) throw ValidationError("vector length differs from dim");
            return c.assign(std::span<const float>(v.data(), c.dim()));
          },
          py::arg("vector"))
      .def("save", [](const Codebook& c, const std::string& path) { save_codebook(path, c); });
  m.def(
      "fit_codebook",
      [](const FloatArray& vectors, int k, std::uint64_t seed, int max_iters, unsigned threads) {
        if (vectors.ndim() != 2) throw ValidationError("vectors must be an (n, dim) array");
        KMeansOptions opt;
        opt.k = k;
        opt.seed = seed;
        opt.max_iters = max_iters;
        opt.threads = threads;
        const auto dim = static_cast<std::size_t>(vectors.shape(1));
        py::gil_scoped_release release;
        return fit_codebook(std::span<const float>(vectors.data(), static_cast<std::size_t>(vectors.size())), dim,
                            opt);
      },
      py::arg("vectors"), py::arg("k") = 500, py::arg("seed") = 0, py::arg("max_iters") = 100,
      py::arg("threads") = 0);
  m.def("load_codebook", [](const std::string& path) { return load_codebook(path); }, py::arg("path"));

  py::class_<BosweHistogram>(m, "BosweHistogram")
      .def_property_readonly("bins",
                             [](const BosweHistogram& h) {
                               std::map<std::uint32_t, double> out(h.bins.begin(), h.bins.end());
                               return out;
                             })
      .def_readonly("token_count", &BosweHistogram::token_count)
      .def_readonly("oov_count", &BosweHistogram::oov_count)
      .def("mass", &BosweHistogram::mass);
  m.def(
      "build_histogram",
      [](const Codebook& c, const std::vector<std::string>& tokens, const EmbeddingModel& model, bool normalize) {
        return build_histogram(c, tokens, model, normalize);
      },
      py::arg("codebook"), py::arg("tokens"), py::arg("model"), py::arg("normalize") = true);
  m.def("hik", &hik_pair, py::arg("a"), py::arg("b"));
  m.def(
      "boswe_gram",
      [](const std::vector<BosweHistogram>& h, std::optional<std::vector<std::string>> ids, unsigned threads) {
        return boswe_gram_matrix(h, default_ids(h.size(), ids), threads);
      },
      py::arg("histograms"), py::arg("ids") = std::nullopt, py::arg("threads") = 0);
  m.def(
      "mean_std_embedding",
      [](const std::vector<std::string>& tokens, const EmbeddingModel& model) -> py::object {
        const auto d = mean_std_doc_embedding(tokens, model);
        if (!d.defined) return py::none();
        py::array_t<double> a(static_cast<py::ssize_t>(d.features.size()));
        std::copy(d.features.begin(), d.features.end(), a.mutable_data());
        return std::move(a);
      },
      py::arg("tokens"), py::arg("model"));

  // fusion
  m.def("sum_kernels", &sum_kernels, py::arg("k1"), py::arg("k2"));
  m.def(
      "linear_gram",
      [](const DoubleArray& x, std::optional<DoubleArray> y, std::optional<std::vector<std::string>> ids) {
        const auto fx = dense_features(x, ids);
        return y ? linear_gram(fx, dense_features(*y, std::nullopt)) : linear_gram(fx, fx);
      },
      py::arg("x"), py::arg("y") = std::nullopt, py::arg("ids") = std::nullopt);

  // svr
  py::enum_<BoundScaling>(m, "BoundScaling")
      .value("libsvm", BoundScaling::libsvm)
      .value("per_sample", BoundScaling::per_sample);
  py::class_<SvrConfig>(m, "SvrConfig")
      .def(py::init([](double c, double nu, double tol, std::uint64_t max_iter, BoundScaling scaling) {
             SvrConfig s;
             s.c = c;
             s.nu = nu;
             s.kkt_tolerance = tol;
             s.max_iterations = max_iter;
             s.scaling = scaling;
             return s;
           }),
           py::arg("c") = 1000.0, py::arg("nu") = 0.1, py::arg("kkt_tolerance") = 1e-3,
           py::arg("max_iterations") = 10'000'000, py::arg("scaling") = BoundScaling::libsvm)
      .def_readwrite("c", &SvrConfig::c)
      .def_readwrite("nu", &SvrConfig::nu)
      .def_readwrite("kkt_tolerance", &SvrConfig::kkt_tolerance)
      .def_readwrite("max_iterations", &SvrConfig::max_iterations)
      .def_readwrite("scaling", &SvrConfig::scaling);
  py::class_<SvrModel>(m, "SvrModel")
      .def_readonly("train_ids", &SvrModel::train_ids)
      .def_readonly("coefficients", &SvrModel::coefficients)
      .def_readonly("bias", &SvrModel::bias)
      .def_readonly("epsilon_star", &SvrModel::epsilon_star)
      .def_readonly("objective", &SvrModel::objective)
      .def_readonly("iterations", &SvrModel::iterations)
      .def_property_readonly("converged", [](const SvrModel& s) { return !s.warning(); })
      .def("support_ids", &SvrModel::support_ids)
      .def("save", [](const SvrModel& s, const std::string& path) { save_svr_model(path, s); });
  m.def(
      "train_nu_svr",
      [](const KernelMatrix& k, const std::vector<double>& y, const SvrConfig& cfg, std::uint64_t seed) {
        return train_nu_svr(k, y, cfg, seed);
      },
      py::arg("kernel"), py::arg("y"), py::arg("config") = SvrConfig{}, py::arg("seed") = 0,
      py::call_guard<py::gil_scoped_release>());
  m.def("predict", &predict, py::arg("model"), py::arg("kernel"));
  m.def("load_svr_model", &load_svr_model, py::arg("path"));

  // metrics
  py::class_<QwkReport>(m, "QwkReport")
      .def_readonly("kappa", &QwkReport::kappa)
      .def_readonly("confusion", &QwkReport::confusion)
      .def_readonly("n_items", &QwkReport::n_items)
      .def_readonly("degenerate", &QwkReport::degenerate);
  m.def(
      "qwk", [](const std::vector<int>& p, const std::vector<int>& g, int lo, int hi) { return qwk(p, g, {lo, hi}); },
      py::arg("pred"), py::arg("gold"), py::arg("min"), py::arg("max"));

  // synthetic data and the experiment harness
  m.def(
      "synthetic_corpus",
      [](std::size_t n, std::uint64_t seed, int prompt) {
        SyntheticOptions opt;
        opt.prompt = prompt;
        auto c = make_synthetic_corpus(n, seed, opt);
        py::list essays;
        for (const auto& e : c.essays) essays.append(essay_dict(e));
        return py::make_tuple(essays, std::move(c.embeddings));
      },
      py::arg("n"), py::arg("seed") = 0, py::arg("prompt") = 1,
      "Returns (essays, embeddings) with a planted score-bearing keyword.");

  py::enum_<Mode>(m, "Mode").value("in_domain", Mode::in_domain).value("cross_domain", Mode::cross_domain);
  py::enum_<Representation>(m, "Representation")
      .value("hisk", Representation::hisk)
      .value("boswe", Representation::boswe)
      .value("fused", Representation::fused);
  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("mode", &ExperimentConfig::mode)
      .def_readwrite("representations", &ExperimentConfig::representations)
      .def_readwrite("prompts", &ExperimentConfig::prompts)
      .def_readwrite("pairs", &ExperimentConfig::pairs)
      .def_property(
          "ngrams", [](const ExperimentConfig& c) { return std::make_pair(c.ngrams.min, c.ngrams.max); },
          [](ExperimentConfig& c, std::pair<int, int> r) { c.ngrams = {r.first, r.second}; })
      .def_readwrite("normalize_hisk", &ExperimentConfig::normalize_hisk)
      .def_readwrite("k", &ExperimentConfig::k)
      .def_readwrite("kmeans_max_iters", &ExperimentConfig::kmeans_max_iters)
      .def_readwrite("svr", &ExperimentConfig::svr)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("folds", &ExperimentConfig::folds)
      .def_readwrite("repetitions", &ExperimentConfig::repetitions)
      .def_readwrite("n_t_values", &ExperimentConfig::n_t_values)
      .def_readwrite("data_path", &ExperimentConfig::data_path)
      .def_readwrite("embeddings_path", &ExperimentConfig::embeddings_path)
      .def_readwrite("cache_dir", &ExperimentConfig::cache_dir)
      .def_readwrite("threads", &ExperimentConfig::threads);

  py::class_<ResultCell>(m, "ResultCell")
      .def_readonly("key", &ResultCell::key)
      .def_readonly("n_t", &ResultCell::n_t)
      .def_readonly("representation", &ResultCell::representation)
      .def_readonly("qwk", &ResultCell::qwk)
      .def_readonly("std", &ResultCell::std_dev)
      .def_readonly("fold_std", &ResultCell::fold_std)
      .def_readonly("runs", &ResultCell::runs)
      .def_readonly("failed", &ResultCell::failed)
      .def_readonly("failure", &ResultCell::failure)
      .def("ok", &ResultCell::ok);
  py::class_<ResultTable>(m, "ResultTable")
      .def_readonly("cells", &ResultTable::cells)
      .def("overall", &ResultTable::overall)
      .def(
          "report",
          [](const ResultTable& t, const std::string& fmt) { return emit_report(t, parse_report_format(fmt)); },
          py::arg("format") = "text");

  auto run = [](ExperimentConfig cfg, std::optional<py::iterable> essays, std::optional<EmbeddingModel> embeddings,
                Mode mode) {
    cfg.mode = mode;
    Dataset data = essays ? dataset_from(*essays, std::move(embeddings)) : load_dataset(cfg);
    py::gil_scoped_release release;
    return mode == Mode::in_domain ? run_in_domain(cfg, data).table : run_cross_domain(cfg, data).table;
  };
  m.def(
      "run_in_domain",
      [run](const ExperimentConfig& cfg, std::optional<py::iterable> essays, std::optional<EmbeddingModel> emb) {
        return run(cfg, std::move(essays), std::move(emb), Mode::in_domain);
      },
      py::arg("config"), py::arg("essays") = std::nullopt, py::arg("embeddings") = std::nullopt);
  m.def(
      "run_cross_domain",
      [run](const ExperimentConfig& cfg, std::optional<py::iterable> essays, std::optional<EmbeddingModel> emb) {
        return run(cfg, std::move(essays), std::move(emb), Mode::cross_domain);
      },
      py::arg("config"), py::arg("essays") = std::nullopt, py::arg("embeddings") = std::nullopt);
}
