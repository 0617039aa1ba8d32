// Python bindings: the main operations of the library, taking algebra
// bundles as json strings and returning plain python structures.
#include <pybind11/pybind11.h>

#include "hdb/bundle.hpp"
#include "hdb/rational.hpp"

namespace py = pybind11;
using namespace hdb;

namespace {

py::object json_to_py(const Json& j) {
  switch (j.type()) {
    case Json::value_t::null:
      return py::none();
    case Json::value_t::boolean:
      return py::bool_(j.get<bool>());
    case Json::value_t::number_integer:
      return py::int_(j.get<long long>());
    case Json::value_t::number_unsigned:
      return py::int_(j.get<unsigned long long>());
    case Json::value_t::number_float:
      return py::float_(j.get<double>());
    case Json::value_t::string:
      return py::str(j.get<std::string>());
    case Json::value_t::array: {
      py::list out;
      for (const auto& e : j) out.append(json_to_py(e));
      return out;
    }
    case Json::value_t::object: {
      py::dict out;
      for (const auto& [k, v] : j.items()) out[py::str(k)] = json_to_py(v);
      return out;
    }
    default:
      return py::none();
  }
}

AlgebraBundle bundle_from_string(const std::string& text) {
  return parse_bundle(Json::parse(text));
}

py::object result_to_py(const CmdResult& r) {
  Json out = report_to_json(r.report);
  out["command"] = r.command;
  for (const auto& [k, v] : r.payload.items()) out[k] = v;
  return json_to_py(out);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "exact higher derived brackets on graded Lie algebras";

  m.def("bernoulli_first", [](unsigned n) { return rat_str(bernoulli_first(n)); },
        py::arg("n"), "first Bernoulli number B_n, as an exact rational string");
  m.def("bernoulli_second", [](unsigned n) { return rat_str(bernoulli_second(n)); },
        py::arg("n"), "second sequence B_n(1) = (-1)^n B_n");

  m.def("validate",
        [](const std::string& bundle) { return result_to_py(cmd_validate(bundle_from_string(bundle))); },
        py::arg("bundle"), "check all algebra axioms of a json bundle");
  m.def("brackets",
        [](const std::string& bundle, const std::string& source, int arity, bool via_transfer) {
          return result_to_py(cmd_brackets(bundle_from_string(bundle), source, arity, via_transfer));
        },
        py::arg("bundle"), py::arg("source"), py::arg("arity") = 4,
        py::arg("via_transfer") = false,
        "derived brackets of a named element or derivation");
  m.def("check",
        [](const std::string& bundle, const std::string& suite, int arity, uint64_t seed) {
          return result_to_py(cmd_check(bundle_from_string(bundle), suite, arity, seed));
        },
        py::arg("bundle"), py::arg("suite") = "all", py::arg("arity") = 4, py::arg("seed") = 0,
        "identity suites: theorems | linfty | examples | all");
  m.def("transfer_check",
        [](const std::string& bundle, int arity) {
          return result_to_py(cmd_transfer_check(bundle_from_string(bundle), arity));
        },
        py::arg("bundle"), py::arg("arity") = 4,
        "closed-form brackets vs homotopy transfer, coefficientwise");
  m.def("cocone",
        [](const std::string& bundle, bool with_second_algebra, int arity) {
          return result_to_py(cmd_cocone(bundle_from_string(bundle), with_second_algebra, arity));
        },
        py::arg("bundle"), py::arg("with_second_algebra") = false, py::arg("arity") = 4,
        "cocylinder / cocone structure of the bundle's subalgebra inclusion");
  m.def("fiber_model",
        [](const std::string& bundle, int arity) {
          return result_to_py(cmd_fiber_model(bundle_from_string(bundle), arity));
        },
        py::arg("bundle"), py::arg("arity") = 4,
        "fiber product model and its morphism into the cocylinder");
}
