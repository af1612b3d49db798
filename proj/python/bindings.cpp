#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "tweetnews/cli/config.hpp"
#include "tweetnews/cli/stages.hpp"
#include "tweetnews/corruptor/corruptor.hpp"
#include "tweetnews/datakit/kmeans.hpp"
#include "tweetnews/datakit/tfidf.hpp"
#include "tweetnews/error.hpp"
#include "tweetnews/eval/metrics.hpp"
#include "tweetnews/propositions/propositions.hpp"
#include "tweetnews/tokenizer/bpe.hpp"

namespace py = pybind11;
using namespace tweetnews;

PYBIND11_MODULE(_core, m) {
  m.doc() = "tweetnews core: tokenizer, corruptor, merge data, metrics and the pipeline";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());

  py::class_<tokenizer::Vocab>(m, "Vocab")
      .def_static("train", [](const std::vector<std::string>& lines, std::size_t size) {
        std::string corpus;
        for (const auto& l : lines) corpus += l + "\n";
        return tokenizer::Vocab::train(corpus, size);
      }, py::arg("lines"), py::arg("vocab_size"))
      .def_static("load", &tokenizer::Vocab::load)
      .def("save", &tokenizer::Vocab::save)
      .def("encode", &tokenizer::Vocab::encode)
      .def("decode", [](const tokenizer::Vocab& v, const std::vector<tokenizer::TokenId>& ids) { return v.decode(ids); })
      .def("token", &tokenizer::Vocab::token_of)
      .def("__len__", &tokenizer::Vocab::size);

  py::class_<corruptor::CorruptionStats>(m, "CorruptionStats")
      .def(py::init<>())
      .def_readonly("sentences", &corruptor::CorruptionStats::sentences)
      .def_readonly("words", &corruptor::CorruptionStats::words)
      .def_readonly("spelled", &corruptor::CorruptionStats::spelled)
      .def_readonly("entities", &corruptor::CorruptionStats::entities)
      .def_readonly("entities_hashtagged", &corruptor::CorruptionStats::entities_hashtagged)
      .def_readonly("injected", &corruptor::CorruptionStats::injected);

  m.def("corrupt", [](const std::vector<std::string>& sentences, std::uint64_t seed,
                      const std::vector<std::string>& hashtag_pool, double spell_p, double ne_hashtag_p,
                      double random_hashtag_p) {
    corruptor::CorruptionSpec spec;
    spec.hashtag_pool = hashtag_pool;
    spec.spell_p = spell_p;
    spec.ne_hashtag_p = ne_hashtag_p;
    spec.random_hashtag_p = random_hashtag_p;
    corruptor::Corruptor c(spec);
    corruptor::CorruptionStats stats;
    std::vector<std::string> out;
    for (std::size_t i = 0; i < sentences.size(); ++i) out.push_back(c.corrupt(sentences[i], derive_seed(seed, i), &stats));
    return std::make_pair(out, stats);
  }, py::arg("sentences"), py::arg("seed"), py::arg("hashtag_pool") = std::vector<std::string>{"#news"},
     py::arg("spell_p") = 0.15, py::arg("ne_hashtag_p") = 0.15, py::arg("random_hashtag_p") = 0.15,
     "Synthetic tweets H(y), one derived seed per line, as in the CLI.");

  py::class_<eval::BleuReport>(m, "BleuReport")
      .def_property_readonly("precisions", [](const eval::BleuReport& r) {
        return std::vector<double>(std::begin(r.precisions), std::end(r.precisions));
      })
      .def_readonly("brevity_penalty", &eval::BleuReport::brevity_penalty)
      .def_readonly("score", &eval::BleuReport::score)
      .def_readonly("hyp_len", &eval::BleuReport::hyp_len)
      .def_readonly("ref_len", &eval::BleuReport::ref_len)
      .def("__str__", &eval::format_bleu);
  m.def("bleu", py::overload_cast<const std::vector<std::string>&, const std::vector<std::string>&>(&eval::bleu),
        py::arg("hypotheses"), py::arg("references"));
  m.def("bleu_multi",
        py::overload_cast<const std::vector<std::string>&, const std::vector<std::vector<std::string>>&>(&eval::bleu),
        py::arg("hypotheses"), py::arg("reference_sets"));
  m.def("fleiss_kappa", [](const std::vector<std::vector<std::size_t>>& counts) {
    return eval::fleiss_kappa(eval::RatingMatrix{counts});
  }, py::arg("counts"));
  m.def("welch_t", [](const std::vector<double>& a, const std::vector<double>& b) {
    const auto r = eval::welch_t(a, b);
    return py::dict(py::arg("t") = r.t, py::arg("df") = r.df, py::arg("p") = r.p);
  }, py::arg("a"), py::arg("b"));

  m.def("filter_by_similarity", &datakit::filter_by_similarity, py::arg("candidates"), py::arg("references"),
        py::arg("threshold"));
  m.def("keyword_filter", &datakit::keyword_filter, py::arg("docs"), py::arg("keywords") = datakit::default_disaster_keywords());
  m.def("kmeans", [](const std::vector<datakit::Point>& points, std::size_t k, std::uint64_t seed, std::size_t max_iter) {
    const auto r = datakit::kmeans(points, k, seed, max_iter);
    return py::dict(py::arg("centroids") = r.centroids, py::arg("assignment") = r.assignment,
                    py::arg("inertia") = r.inertia, py::arg("iterations") = r.iterations,
                    py::arg("converged") = r.converged,
                    py::arg("representatives") = datakit::select_representatives(r, points));
  }, py::arg("points"), py::arg("k"), py::arg("seed"), py::arg("max_iter") = 100);

  m.def("generate_templated", [](long n, std::uint64_t seed) {
    std::vector<std::pair<std::string, std::vector<std::string>>> out;
    for (auto& r : propositions::generate_templated(n, seed)) out.emplace_back(r.sentence, r.propositions);
    return out;
  }, py::arg("n"), py::arg("seed"), "(sentence, propositions) records.");
  m.def("build_merge_pairs", [](const std::vector<std::pair<std::string, std::vector<std::string>>>& records,
                                const tokenizer::Vocab& vocab, std::size_t max_tokens) {
    std::vector<propositions::PropositionRecord> recs;
    for (const auto& [s, p] : records) recs.push_back({s, p, propositions::RecordSource::kIngested});
    propositions::BuildReport report;
    std::vector<std::pair<std::string, std::string>> pairs;
    for (auto& p : propositions::build_merge_pairs(recs, vocab, max_tokens, &report)) pairs.emplace_back(p.source, p.target);
    return py::make_tuple(pairs, py::dict(py::arg("records") = report.records, py::arg("emitted") = report.emitted,
                                          py::arg("truncated") = report.truncated, py::arg("dropped") = report.dropped));
  }, py::arg("records"), py::arg("vocab"), py::arg("max_tokens") = propositions::kMaxSourceTokens);

  m.def("config_keys", &cli::config_keys);
  m.def("run_pipeline", [](const std::map<std::string, std::string>& settings, const std::string& config_path,
                           const std::filesystem::path& groups, const std::optional<std::filesystem::path>& reference,
                           const std::filesystem::path& out) {
    auto cfg = config_path.empty() ? cli::PipelineConfig{} : cli::load_config(config_path);
    for (const auto& [k, v] : settings) cli::set_config_value(cfg, k, v);
    cfg.validate();
    cli::PipelineResult r;
    {
      py::gil_scoped_release release;
      r = cli::run_pipeline(cfg, groups, reference, out);
    }
    return py::make_tuple(r.paragraphs, r.bleu);
  }, py::arg("settings") = std::map<std::string, std::string>{}, py::arg("config") = "", py::arg("groups"),
     py::arg("reference") = std::nullopt, py::arg("out"),
     "Runs the full pipeline; returns (paragraphs, bleu line or None).");
}
