#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "parselab/cli.hpp"
#include "parselab/dcst.hpp"
#include "parselab/evaluation.hpp"
#include "parselab/graph_parser.hpp"
#include "parselab/l2s.hpp"
#include "parselab/treebank.hpp"

namespace py = pybind11;
using namespace parselab;

namespace {

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ValidationError("empty score matrix");
  Eigen::MatrixXd m(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows[0].size()) throw ValidationError("ragged score matrix");
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(static_cast<Eigen::Index>(r),
                                                       static_cast<Eigen::Index>(c)) = rows[r][c];
  }
  return m;
}

treebank::Sentence sentence_from(const std::vector<std::string>& forms,
                                 const std::vector<std::string>& morphs,
                                 const std::vector<int>& heads,
                                 const std::vector<std::string>& labels) {
  treebank::Sentence s;
  for (std::size_t i = 0; i < forms.size(); ++i) {
    treebank::Token t;
    t.id = static_cast<int>(i) + 1;
    t.form = forms[i];
    t.morph = i < morphs.size() ? morphs[i] : "";
    t.gold_head = i < heads.size() ? heads[i] : -1;
    t.gold_label = i < labels.size() ? labels[i] : "";
    s.tokens.push_back(std::move(t));
  }
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "parselab core bindings";

  py::class_<treebank::Corpus>(m, "Corpus")
      .def("__len__", [](const treebank::Corpus& c) { return c.size(); })
      .def("token_count", &treebank::Corpus::token_count)
      .def("has_predictions", &treebank::Corpus::has_predictions)
      .def("forms",
           [](const treebank::Corpus& c, std::size_t i) {
             std::vector<std::string> out;
             for (const auto& t : c.sentences.at(i).tokens) out.push_back(t.form);
             return out;
           })
      .def("morphs",
           [](const treebank::Corpus& c, std::size_t i) {
             std::vector<std::string> out;
             for (const auto& t : c.sentences.at(i).tokens) out.push_back(t.morph);
             return out;
           })
      .def("heads",
           [](const treebank::Corpus& c, std::size_t i) { return c.sentences.at(i).gold_heads(); })
      .def("labels", [](const treebank::Corpus& c, std::size_t i) {
        return c.sentences.at(i).gold_labels();
      })
      .def("predicted_heads",
           [](const treebank::Corpus& c, std::size_t i) { return c.predicted.at(i).heads; })
      .def("predicted_labels",
           [](const treebank::Corpus& c, std::size_t i) { return c.predicted.at(i).labels; });

  m.def("read_conll", [](const std::string& text) {
    std::istringstream ss(text);
    return treebank::read_conll(ss);
  });
  m.def("read_conll_file", [](const std::string& path) { return treebank::read_conll_file(path); });
  m.def("write_conll", [](const treebank::Corpus& c, const std::string& which) {
    std::ostringstream ss;
    treebank::write_conll(ss, c,
                          which == "predicted" ? treebank::TreeChannel::Predicted
                                               : treebank::TreeChannel::Gold);
    return ss.str();
  }, py::arg("corpus"), py::arg("which") = "gold");

  m.def("validate_tree", [](const std::vector<int>& heads) {
    std::vector<std::string> out;
    for (const auto& v : treebank::validate_tree(heads)) {
      std::string kind = v.kind == treebank::Violation::Kind::OutOfRange ? "out_of_range"
                         : v.kind == treebank::Violation::Kind::SelfLoop ? "self_loop"
                                                                         : "cycle";
      out.push_back(kind + ":" + std::to_string(v.node));
    }
    return out;
  });
  m.def("is_projective",
        [](const std::vector<int>& heads) { return treebank::is_projective(heads); });
  m.def("projectivize", &treebank::projectivize);
  m.def("root_distance", [](const std::vector<int>& heads, int node) {
    return treebank::root_distance(heads, node);
  });
  m.def("nonprojectivity_degree", [](const std::vector<int>& heads, int head, int dep) {
    treebank::DependencyTree tree(heads);
    return treebank::nonprojectivity_degree(tree, {head, dep, ""});
  });

  m.def("cle_decode", [](const std::vector<std::vector<double>>& scores, bool single_root) {
    return graph::cle_decode(to_matrix(scores), single_root);
  }, py::arg("scores"), py::arg("single_root") = false);
  m.def("eisner_decode", [](const std::vector<std::vector<double>>& scores) {
    return graph::eisner_decode(to_matrix(scores));
  });

  m.def("micro_scores", [](const std::vector<std::vector<int>>& gold_heads,
                           const std::vector<std::vector<int>>& pred_heads) {
    eval::Trees gold, pred;
    for (const auto& h : gold_heads) gold.emplace_back(h);
    for (const auto& h : pred_heads) pred.emplace_back(h);
    auto s = eval::micro_scores(gold, pred);
    return py::make_tuple(s.uas, s.las);
  });
  m.def("mad", &eval::mad);
  m.def("paired_t_test", [](const std::vector<double>& a, const std::vector<double>& b) {
    auto r = eval::paired_t_test(a, b);
    return py::make_tuple(r.t, r.p, r.degenerate);
  });

  m.def("extract_aux_tags",
        [](const std::vector<int>& heads, const std::vector<std::string>& forms,
           const std::vector<std::string>& morphs, const std::string& task) {
          treebank::DependencyTree tree(heads);
          auto s = sentence_from(forms, morphs, heads, {});
          return dcst::extract_aux_tags(tree, s, dcst::aux_task_from_name(task));
        });
  m.def("decode_relative_pos",
        [](const std::vector<std::string>& tags, const std::vector<std::string>& forms,
           const std::vector<std::string>& morphs) {
          auto s = sentence_from(forms, morphs, {}, {});
          return dcst::decode_relative_pos(tags, s);
        });

  m.def("permute_heads",
        [](const std::vector<int>& heads, const std::vector<std::string>& forms,
           const std::vector<std::string>& morphs, std::uint64_t seed) {
          auto s = sentence_from(forms, morphs, heads, {});
          auto p = treebank::permute_words(s, treebank::PermuteMode::SeededShuffle, seed);
          std::vector<std::string> pforms;
          for (const auto& t : p.tokens) pforms.push_back(t.form);
          return py::make_tuple(pforms, p.gold_heads());
        },
        py::arg("heads"), py::arg("forms"), py::arg("morphs"), py::arg("seed"));

  // Full CLI: parselab._core.cli_run(["train", "--parser", ...]) -> exit code.
  m.def("cli_run", [](const std::vector<std::string>& args) { return cli::run(args); });
}
