// Python module: JSON crosses the boundary as strings; the package wrapper
// converts to and from dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "llmmcts/catalog.hpp"
#include "llmmcts/grounding.hpp"
#include "llmmcts/harness.hpp"
#include "llmmcts/llm_adapter.hpp"
#include "llmmcts/policy.hpp"
#include "llmmcts/scene_io.hpp"
#include "llmmcts/similarity.hpp"
#include "llmmcts/worldsim.hpp"

namespace py = pybind11;
using namespace llmmcts;

namespace {

std::string run_eval_json(const std::string& config, const std::string& base_dir) {
  const RunConfig cfg = RunConfig::from_json(nlohmann::json::parse(config), base_dir);
  py::gil_scoped_release release;
  return run_eval(cfg).to_json().dump();
}

py::dict ground(const std::string& text, std::vector<std::string> candidates) {
  if (candidates.empty()) candidates = Catalog::household().all_names();
  const auto r = ground_name(text, candidates, *default_similarity());
  py::dict d;
  d["canonical"] = r.canonical;
  d["score"] = r.score;
  d["accepted"] = r.accepted;
  d["index"] = r.index;
  return d;
}

std::vector<std::string> admissible_labels(const std::string& scene) {
  const SceneState s = scene_from_json(nlohmann::json::parse(scene));
  std::vector<std::string> out;
  for (const auto& a : admissible_actions(s)) out.push_back(action_label(*s.scene, a));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "LLM-guided Monte Carlo tree search planner for household rearrangement";

  m.def("run_eval_json", &run_eval_json, py::arg("config"), py::arg("base_dir") = ".",
        "Run an evaluation from a RunConfig JSON string; returns the report JSON string.");
  m.def("ground_name", &ground, py::arg("text"), py::arg("candidates") = std::vector<std::string>{},
        "Nearest catalog name (or candidate) by embedding similarity.");
  m.def("admissible_labels", &admissible_labels, py::arg("scene"),
        "Canonical labels of the admissible actions in a scene JSON string.");
  m.def(
      "empirical_policy_from_scores",
      [](const std::vector<double>& scores, double lambda) { return empirical_policy_from_scores(scores, lambda); },
      py::arg("scores"), py::arg("lambda_"));
  m.def("softmax", [](const std::vector<double>& x) { return softmax(x); }, py::arg("logits"));
  m.def("sem_percent", &sem_percent, py::arg("successes"), py::arg("n"));
  m.def("fixture_key", &fixture_key, py::arg("op"), py::arg("sample"), py::arg("prompt"));
  m.def("sha256_hex", &sha256_hex, py::arg("data"));
}
