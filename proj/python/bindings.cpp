// Copyright 2026 The adforge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

#include "adforge/adtree/branch.hpp"
#include "adforge/adtree/dot.hpp"
#include "adforge/errors.hpp"
#include "adforge/flow/backend.hpp"
#include "adforge/flow/extract.hpp"
#include "adforge/flow/prompt.hpp"
#include "adforge/metrics/metrics.hpp"
#include "adforge/sce/cloud.hpp"
#include "adforge/sce/experiment.hpp"
#include "adforge/sce/runner.hpp"
#include "adforge/service/handlers.hpp"
#include "adforge/yaml_json.hpp"

namespace py = pybind11;
using namespace adforge;
using nlohmann::json;

namespace {

// JSON crosses the boundary as text; the Python package decodes it.
std::string Dump(const json& doc) { return service::Render(doc); }

json TreeSummary(const adtree::ADTree& t) {
  json kinds = json::object();
  for (auto k : {adtree::NodeKind::kRoot, adtree::NodeKind::kService, adtree::NodeKind::kAttack,
                 adtree::NodeKind::kDefense, adtree::NodeKind::kGoal}) {
    kinds[std::string(adtree::KindName(k))] = t.CountKind(k);
  }
  json goals = json::array();
  for (const auto& [id, node] : t.nodes()) {
    if (node.kind == adtree::NodeKind::kGoal) goals.push_back(id);
  }
  return {{"name", t.name}, {"root", t.root()},  {"nodes", t.nodes().size()},
          {"edges", t.edges().size()}, {"kinds", kinds}, {"goals", goals}};
}

sce::DetectorConfig DetectorFrom(const std::optional<std::string>& text) {
  if (!text || text->empty()) return {};
  return sce::DetectorFromJson(YamlTextToJson(*text));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "adforge native core";

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = py::reinterpret_borrow<py::object>(base.ptr())(e.what());
      err.attr("code") = e.code();
      PyErr_SetObject(base.ptr(), err.ptr());
    }
  });

  m.def("default_data_dir", [] { return std::string(ADFORGE_DEFAULT_DATA_DIR); });

  m.def("canonicalize", [](const std::string& dot) { return adtree::EmitDot(adtree::ParseDot(dot)); },
        py::arg("dot"), "Parse DOT and emit it in canonical form.");

  m.def("summary", [](const std::string& dot) { return Dump(TreeSummary(adtree::ParseDot(dot))); },
        py::arg("dot"));

  m.def(
      "score",
      [](const std::string& dot, const std::string& catalog_path,
         const std::optional<std::string>& reference) {
        const auto catalog = metrics::TechniqueCatalog::Load(catalog_path);
        std::optional<metrics::ReferenceOrder> ref;
        if (reference) ref = metrics::ReferenceOrder::FromLines(*reference);
        return service::Render(service::ScoreDocument(dot, catalog, ref));
      },
      py::arg("dot"), py::arg("catalog_path"), py::arg("reference") = py::none());

  m.def("extract_dot_blocks", &flow::ExtractDotBlocks, py::arg("reply"));

  m.def("prompt_key", &flow::PromptKey, py::arg("prompt"));

  m.def(
      "render_insert_prompt",
      [](const std::string& spec_text) {
        return flow::RenderInsertPrompt(flow::PromptSpecFromText(spec_text));
      },
      py::arg("spec_text"));

  m.def(
      "compile_experiment",
      [](const std::string& dot, const std::string& goal, const std::optional<std::string>& leaf,
         const std::optional<std::string>& scenario_text) {
        const auto tree = adtree::ParseDot(dot);
        const auto defaults = scenario_text
                                  ? sce::ScenarioDefaultsFromJson(YamlTextToJson(*scenario_text))
                                  : sce::BuiltinDefaults();
        return Dump(sce::ToJson(service::CompileBranch(tree, goal, leaf, defaults)));
      },
      py::arg("dot"), py::arg("goal"), py::arg("leaf") = py::none(),
      py::arg("scenario") = py::none());

  m.def(
      "run_experiment",
      [](const std::string& experiment_text, const std::string& state_text,
         const std::optional<std::string>& detector, std::uint64_t seed) {
        const auto exp = sce::ExperimentFromJson(YamlTextToJson(experiment_text));
        const auto state = sce::StateFromJson(YamlTextToJson(state_text));
        return Dump(sce::ToJson(sce::RunExperiment(exp, state, DetectorFrom(detector), seed)));
      },
      py::arg("experiment"), py::arg("state"), py::arg("detector") = py::none(),
      py::arg("seed") = 0);
}
