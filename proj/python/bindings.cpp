#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "uca/bench.hpp"
#include "uca/dataset.hpp"
#include "uca/exact.hpp"
#include "uca/neural.hpp"
#include "uca/search.hpp"
#include "uca/valuegen.hpp"

namespace py = pybind11;
using namespace uca;

namespace {

// Labels cross the boundary as ints; -1 marks an unassigned element.
std::vector<int> labels_of(const PartialAssignment& s) {
  std::vector<int> out(s.n());
  for (int j = 0; j < s.n(); ++j) out[j] = s.is_assigned(j) ? s.label(j) : -1;
  return out;
}

PartialAssignment assignment_from(int m, const std::vector<int>& labels) {
  PartialAssignment s(static_cast<int>(labels.size()), m);
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (labels[j] >= 0) s.assign(static_cast<int>(j), labels[j]);
  }
  return s;
}

}  // namespace

PYBIND11_MODULE(_uca, mod) {
  mod.doc() = "Exact and learned search for utilitarian combinatorial assignment";

  py::register_exception<UsageError>(mod, "UsageError", PyExc_ValueError);
  py::register_exception<BudgetError>(mod, "BudgetError", PyExc_RuntimeError);
  py::register_exception<FormatError>(mod, "FormatError", PyExc_ValueError);

  py::class_<NpdParams>(mod, "NpdParams")
      .def(py::init([](double mu, double sigma) { return NpdParams{mu, sigma}; }),
           py::arg("mu") = 1.0, py::arg("sigma") = 0.1)
      .def_readwrite("mu", &NpdParams::mu)
      .def_readwrite("sigma", &NpdParams::sigma);

  py::class_<TrapParams>(mod, "TrapParams")
      .def(py::init([](double sigma, double delta, double tau, double eps) {
             return TrapParams{sigma, delta, tau, eps};
           }),
           py::arg("sigma") = 0.1, py::arg("delta") = 0.1, py::arg("tau") = 10.0,
           py::arg("eps") = 0.1)
      .def_readwrite("sigma", &TrapParams::sigma)
      .def_readwrite("delta", &TrapParams::delta)
      .def_readwrite("tau", &TrapParams::tau_threshold)
      .def_readwrite("eps", &TrapParams::epsilon);

  py::class_<ValueTable>(mod, "ValueTable")
      .def_property_readonly("n", &ValueTable::n)
      .def_property_readonly("m", &ValueTable::m)
      .def_property_readonly("seed", &ValueTable::seed)
      .def("__call__", [](const ValueTable& v, Mask bundle, int t) {
        if (bundle >> v.n() || t < 0 || t >= v.m()) throw py::index_error("bundle or alternative out of range");
        return v(bundle, t);
      })
      .def("values", [](const ValueTable& v) {
        // (2^n, m) copy, mask-major like the table itself.
        py::array_t<double> out({static_cast<py::ssize_t>(v.values().size() / v.m()),
                                 static_cast<py::ssize_t>(v.m())});
        std::copy(v.values().begin(), v.values().end(), out.mutable_data());
        return out;
      })
      .def("save", &ValueTable::save)
      .def_static("load", &ValueTable::load);

  mod.def("trap_mean", &trap_mean, py::arg("size"), py::arg("params") = TrapParams{});
  mod.def(
      "generate_npd",
      [](int n, int m, std::uint64_t seed, const NpdParams& p) { return generate_npd({n, m, seed}, p); },
      py::arg("n"), py::arg("m"), py::arg("seed"), py::arg("params") = NpdParams{});
  mod.def(
      "generate_trap",
      [](int n, int m, std::uint64_t seed, const TrapParams& p) {
        return generate_trap({n, m, seed}, p);
      },
      py::arg("n"), py::arg("m"), py::arg("seed"), py::arg("params") = TrapParams{});

  mod.def(
      "value_of",
      [](const std::vector<int>& labels, const ValueTable& v) {
        return value_of(assignment_from(v.m(), labels), v);
      },
      py::arg("labels"), py::arg("table"), "V(S) of a (partial) labeling; -1 means unassigned.");
  mod.def(
      "exact_value_to_go",
      [](const std::vector<int>& labels, const ValueTable& v, std::uint64_t budget) {
        return exact_value_to_go(assignment_from(v.m(), labels), v, budget);
      },
      py::arg("labels"), py::arg("table"), py::arg("budget") = kDefaultNodeBudget);
  mod.def(
      "solve_exact",
      [](const ValueTable& v, std::uint64_t budget) {
        const auto sol = solve_exact(v, budget);
        return py::make_tuple(sol.value, labels_of(sol.assignment));
      },
      py::arg("table"), py::arg("budget") = kDefaultNodeBudget,
      "Returns (optimum, labels).");

  py::class_<LabeledPair>(mod, "LabeledPair")
      .def_property_readonly("labels", [](const LabeledPair& p) { return labels_of(p.assignment); })
      .def_readonly("current_value", &LabeledPair::current_value)
      .def_readonly("target", &LabeledPair::target);

  mod.def(
      "build_dataset",
      [](const ValueTable& v, int kappa, int pairs_per_level, std::uint64_t seed) {
        DatasetConfig cfg;
        cfg.kappa = kappa;
        cfg.pairs_per_level = pairs_per_level;
        cfg.seed = seed;
        py::gil_scoped_release release;
        return build_dataset(v, cfg);
      },
      py::arg("table"), py::arg("kappa"), py::arg("pairs_per_level"), py::arg("seed"));

  py::class_<MlpModel>(mod, "MlpModel")
      .def_static("for_problem", &MlpModel::for_problem, py::arg("n"), py::arg("m"), py::arg("seed"))
      .def_property_readonly("n", &MlpModel::n)
      .def_property_readonly("m", &MlpModel::m)
      .def_property_readonly("parameter_count",
                             [](const MlpModel& model) { return model.params().size(); })
      .def("predict",
           [](const MlpModel& model, const std::vector<int>& labels, const ValueTable& v) {
             return predict_value_to_go(model, assignment_from(v.m(), labels), v);
           })
      .def("save", &MlpModel::save)
      .def_static("load", &MlpModel::load);

  py::class_<EpochLoss>(mod, "EpochLoss")
      .def_readonly("epoch", &EpochLoss::epoch)
      .def_readonly("train_loss", &EpochLoss::train_loss)
      .def_readonly("test_loss", &EpochLoss::test_loss);

  mod.def(
      "train",
      [](const std::vector<LabeledPair>& train_set, const std::vector<LabeledPair>& test_set,
         int n, int m, double lr, int batch, int epochs, std::uint64_t seed) {
        TrainConfig cfg;
        cfg.learning_rate = lr;
        cfg.batch_size = batch;
        cfg.epochs = epochs;
        cfg.seed = seed;
        py::gil_scoped_release release;
        auto result = train(train_set, test_set, n, m, cfg);
        return std::make_pair(std::move(result.model), std::move(result.trace));
      },
      py::arg("train_set"), py::arg("test_set"), py::arg("n"), py::arg("m"),
      py::arg("learning_rate") = 1e-3, py::arg("batch_size") = 64, py::arg("epochs") = 200,
      py::arg("seed") = 0, "Returns (model, trace).");

  mod.def(
      "grid_search",
      [](const std::vector<LabeledPair>& train_set, const std::vector<LabeledPair>& test_set,
         int n, int m, const std::vector<double>& lrs, const std::vector<int>& batches, int epochs,
         std::uint64_t seed) {
        TrainConfig base;
        base.epochs = epochs;
        base.seed = seed;
        py::gil_scoped_release release;
        auto g = grid_search(train_set, test_set, n, m, lrs, batches, base);
        std::vector<std::tuple<double, int, double>> cells;
        for (const auto& c : g.cells) cells.emplace_back(c.learning_rate, c.batch_size, c.test_loss);
        return std::make_tuple(std::move(g.result.model), g.best.learning_rate, g.best.batch_size,
                               std::move(cells));
      },
      py::arg("train_set"), py::arg("test_set"), py::arg("n"), py::arg("m"),
      py::arg("lr_grid"), py::arg("batch_grid"), py::arg("epochs") = 200, py::arg("seed") = 0,
      "Returns (model, best_lr, best_batch, [(lr, batch, test_loss), ...]).");

  mod.def(
      "best_of_n",
      [](const ValueTable& v, const std::string& estimator, int evals,
         const std::vector<int>& checkpoints, std::uint64_t seed, const MlpModel* model) {
        Estimator est{parse_estimator(estimator), model};
        if (est.kind == EstimatorKind::kNeural && model == nullptr) {
          throw UsageError("the neural estimator needs a model");
        }
        Rng rng = make_rng(seed);
        RolloutResult r;
        {
          py::gil_scoped_release release;
          r = best_of_n(v, est, evals, checkpoints, rng);
        }
        return py::make_tuple(r.best_value, labels_of(r.best_assignment), r.checkpoints);
      },
      py::arg("table"), py::arg("estimator"), py::arg("evals"), py::arg("checkpoints"),
      py::arg("seed") = 0, py::arg("model") = nullptr,
      "Returns (best_value, labels, [(evaluations, best_so_far), ...]).");

  mod.def(
      "estimate_positive_probability",
      [](const ValueTable& v, std::uint64_t samples, std::uint64_t seed) {
        Rng rng = make_rng(seed);
        py::gil_scoped_release release;
        const auto p = estimate_positive_probability(v, samples, rng);
        return std::make_pair(p.probability, p.positives);
      },
      py::arg("table"), py::arg("samples"), py::arg("seed") = 0, "Returns (probability, positives).");
}
