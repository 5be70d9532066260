#include <pybind11/pybind11.h>
#include <pybind11/complex.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "pivotwalk/cli.hpp"
#include "pivotwalk/config.hpp"
#include "pivotwalk/models.hpp"
#include "pivotwalk/report.hpp"
#include "pivotwalk/suites.hpp"

namespace py = pybind11;
using namespace pw;

namespace {

// Reports cross the boundary as JSON text; the Python side calls json.loads.
std::string suite_json(const std::string& name, const std::string& config_yaml, std::uint64_t seed,
                       std::optional<std::size_t> trials, unsigned threads) {
    auto cfg = parse_config_yaml(config_yaml);
    cfg.run.seed = seed;
    if (trials) cfg.run.trials = *trials;
    SuiteResult r;
    {
        py::gil_scoped_release nogil;
        r = run_suite(name, cfg, threads);
    }
    return report_json(r, cfg).dump();
}

py::tuple cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code;
    {
        py::gil_scoped_release nogil;
        code = run_cli(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_pivotwalk, m) {
    m.doc() = "pivotal-time random walks on free groups and the hyperbolic plane";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<Word>(m, "Word")
        .def(py::init([](const std::string& s, int rank) { return Word::parse(rank, s); }), py::arg("text") = "",
             py::arg("rank") = 2)
        .def_property_readonly("rank", &Word::rank)
        .def_property_readonly("letters", &Word::letters)
        .def("inverse", &Word::inverse)
        .def("cyclic_core", &Word::cyclic_core)
        .def("__mul__", [](const Word& x, const Word& y) { return x * y; })
        .def("__pow__", [](const Word& x, long long n) { return x.pow(n); })
        .def("__len__", &Word::length)
        .def("__eq__", [](const Word& x, const Word& y) { return x == y; })
        .def("__hash__", [](const Word& w) { return py::hash(py::tuple(py::cast(w.letters()))); })
        .def("__str__", &Word::str)
        .def("__repr__", [](const Word& w) { return "Word('" + w.str() + "')"; });

    m.def("translation_length", py::overload_cast<const Word&>(&translation_length));
    m.def("classify", [](const Word& g) { return to_string(classify_isometry(g)); });
    m.def("plane_distance", [](std::complex<double> z, std::complex<double> w) { return plane_distance(z, w); });

    m.def("suite_names", &suite_names);
    m.def("config_hash", [](const std::string& yaml) { return config_hash(parse_config_yaml(yaml)); });
    m.def("default_config", [] { return config_to_yaml(ExperimentConfig{}); });
    m.def("run_suite_json", &suite_json, py::arg("name"), py::arg("config_yaml"), py::arg("seed"),
          py::arg("trials") = py::none(), py::arg("threads") = 1);
    m.def("cli", &cli, py::arg("args"));
    m.attr("schema_version") = kSchemaVersion;
}
