#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "runent/dataset.hpp"
#include "runent/entropy.hpp"
#include "runent/errors.hpp"
#include "runent/metrics.hpp"
#include "runent/synth.hpp"
#include "runent/trace.hpp"
#include "runent/tree.hpp"

#include <map>
#include <optional>
#include <sstream>

namespace py = pybind11;
using namespace runent;

namespace {

Trace parse_text(const std::string& text, bool lenient) {
    if (!lenient) return parse_trace(text);
    RepairStats stats;
    Trace t = parse_trace_lenient(text, {}, stats);
    return repair_trace(t, stats);
}

std::string label_str(Label l) { return to_string(l); }

Label label_arg(const std::string& s) {
    const auto l = label_from_string(s);
    if (!l) throw py::value_error("label must be 'normal', 'failed' or 'unknown'");
    return *l;
}

py::dict scores_dict(const Scores& s) {
    py::dict d;
    d["precision"] = s.precision ? py::object(py::float_(*s.precision)) : py::none();
    d["tpr"] = s.tpr ? py::object(py::float_(*s.tpr)) : py::none();
    d["fpr"] = s.fpr ? py::object(py::float_(*s.fpr)) : py::none();
    d["f1"] = s.f1 ? py::object(py::float_(*s.f1)) : py::none();
    return d;
}

py::dict cm_dict(const ConfusionMatrix& m) {
    py::dict d;
    d["tp"] = m.tp;
    d["fn"] = m.fn;
    d["fp"] = m.fp;
    d["tn"] = m.tn;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "entropy-based failure detection from execution traces";

    py::register_exception<Error>(m, "RunentError");

    m.def(
        "featurize",
        [](const std::string& text, bool lenient) {
            const EntropyFeatures f = featurize(parse_text(text, lenient));
            return py::make_tuple(f.h_a, f.h_b, f.h);
        },
        py::arg("trace_text"), py::arg("lenient") = false,
        "Compute (h_a, h_b, h) for one trace given as text.");

    m.def(
        "durations",
        [](const std::string& text, bool lenient) {
            std::map<std::string, std::int64_t> out;
            for (const auto& [k, v] : compute_durations(parse_text(text, lenient))) out[k] = v;
            return out;
        },
        py::arg("trace_text"), py::arg("lenient") = false,
        "Exclusive duration in ticks per function.");

    m.def(
        "call_counts",
        [](const std::string& text, bool lenient) {
            std::map<std::pair<std::string, std::string>, std::int64_t> out;
            for (const auto& [k, v] : compute_call_counts(parse_text(text, lenient))) out[k] = v;
            return out;
        },
        py::arg("trace_text"), py::arg("lenient") = false,
        "Invocation count per (caller, callee) edge.");

    py::class_<Dataset>(m, "Dataset")
        .def(py::init<>())
        .def_readonly("feature_names", &Dataset::feature_names)
        .def("__len__", [](const Dataset& d) { return d.instances.size(); })
        .def(
            "add",
            [](Dataset& d, const std::string& trace_id, const std::vector<double>& features,
               const std::string& label, bool synthetic) {
                d.instances.push_back({trace_id, features, label_arg(label), synthetic});
            },
            py::arg("trace_id"), py::arg("features"), py::arg("label"),
            py::arg("synthetic") = false)
        .def("count",
             [](const Dataset& d, const std::string& label) { return d.count(label_arg(label)); })
        .def("rows",
             [](const Dataset& d) {
                 py::list out;
                 for (const auto& i : d.instances) {
                     out.append(py::make_tuple(i.trace_id, i.features, label_str(i.label),
                                               i.synthetic));
                 }
                 return out;
             })
        .def_static(
            "read_csv",
            [](const std::string& path, bool allow_unknown) {
                return read_csv(path, allow_unknown);
            },
            py::arg("path"), py::arg("allow_unknown") = false)
        .def("write_csv",
             [](const Dataset& d, const std::string& path) { write_csv(d, path); })
        .def("to_csv", [](const Dataset& d) { return to_csv(d); });

    m.def(
        "smote",
        [](const Dataset& data, double target, int k, std::uint64_t seed, int amount) {
            SmoteResult r = smote(data, target, k, seed, amount);
            return py::make_tuple(std::move(r.data), r.amount, r.already_balanced);
        },
        py::arg("data"), py::arg("target") = 0.2, py::arg("k") = 5, py::arg("seed") = 0,
        py::arg("amount") = 0,
        "Returns (dataset, synthetic copies per minority instance, already_balanced).");

    m.def(
        "stratified_kfold",
        [](const Dataset& data, int k, std::uint64_t seed) {
            py::list out;
            for (const auto& fold : stratified_kfold(data, k, seed)) {
                out.append(py::make_tuple(fold.train, fold.test));
            }
            return out;
        },
        py::arg("data"), py::arg("k") = 10, py::arg("seed") = 0);

    py::class_<TreeModel>(m, "Tree")
        .def_static(
            "train",
            [](const Dataset& data, int m_, double cf, bool prune) {
                TrainConfig cfg;
                cfg.min_leaf = m_;
                cfg.confidence = cf;
                cfg.prune = prune;
                return train(data, cfg);
            },
            py::arg("data"), py::arg("m") = 2, py::arg("cf") = 0.25, py::arg("prune") = true)
        .def(
            "predict",
            [](const TreeModel& model, const std::vector<double>& features) {
                const Prediction p = predict(model, features);
                return py::make_tuple(label_str(p.label), p.confidence);
            },
            py::arg("features"))
        .def("leaf_count", [](const TreeModel& model) { return leaf_count(model); })
        .def("serialize", [](const TreeModel& model) { return serialize(model); })
        .def_static("deserialize",
                    [](const std::string& text) { return deserialize(text); })
        .def_property_readonly("notice", [](const TreeModel& model) { return model.notice; });

    m.def(
        "confusion",
        [](const TreeModel& model, const Dataset& data) { return cm_dict(confusion(model, data)); },
        py::arg("model"), py::arg("data"));

    m.def(
        "score",
        [](std::int64_t tp, std::int64_t fn, std::int64_t fp, std::int64_t tn) {
            return scores_dict(score(ConfusionMatrix{tp, fn, fp, tn}));
        },
        py::arg("tp"), py::arg("fn"), py::arg("fp"), py::arg("tn"));

    m.def(
        "crossval",
        [](const Dataset& data, int m_, double cf, std::uint64_t seed, bool smote_enabled,
           double smote_target, int smote_k, int smote_amount, bool smote_before_cv, int k) {
            TrainConfig cfg;
            cfg.min_leaf = m_;
            cfg.confidence = cf;
            SmoteOptions sm;
            sm.enabled = smote_enabled;
            sm.target = smote_target;
            sm.k = smote_k;
            sm.forced_amount = smote_amount;
            sm.before_cv = smote_before_cv;
            const EvalReport rep = crossval(data, cfg, k, seed, sm);
            py::dict d;
            d["pooled"] = scores_dict(rep.pooled_scores);
            d["macro"] = scores_dict(rep.macro);
            d["confusion"] = cm_dict(rep.pooled);
            d["degenerate"] = rep.degenerate;
            py::list folds;
            for (const auto& f : rep.folds) {
                py::dict fd;
                fd["scores"] = scores_dict(f.scores);
                fd["confusion"] = cm_dict(f.cm);
                fd["leaves"] = f.leaves;
                folds.append(fd);
            }
            d["folds"] = folds;
            return d;
        },
        py::arg("data"), py::arg("m") = 2, py::arg("cf") = 0.25, py::arg("seed") = 0,
        py::arg("smote") = true, py::arg("smote_target") = 0.2, py::arg("smote_k") = 5,
        py::arg("smote_amount") = 0, py::arg("smote_before_cv") = false, py::arg("k") = 10);

    py::class_<WorkloadSpec>(m, "WorkloadSpec")
        .def(py::init([](int n_functions, int max_depth, double branching,
                         std::vector<std::int64_t> base_durations,
                         std::int64_t base_duration_min, std::int64_t base_duration_max,
                         double jitter_min, double jitter_max, std::uint64_t seed) {
                 WorkloadSpec s;
                 s.n_functions = n_functions;
                 s.max_depth = max_depth;
                 s.branching = branching;
                 s.base_durations = std::move(base_durations);
                 s.base_duration_min = base_duration_min;
                 s.base_duration_max = base_duration_max;
                 s.jitter_min = jitter_min;
                 s.jitter_max = jitter_max;
                 s.seed = seed;
                 validate(s);
                 return s;
             }),
             py::arg("n_functions") = 8, py::arg("max_depth") = 4, py::arg("branching") = 2.0,
             py::arg("base_durations") = std::vector<std::int64_t>{},
             py::arg("base_duration_min") = 50, py::arg("base_duration_max") = 500,
             py::arg("jitter_min") = 0.8, py::arg("jitter_max") = 1.25, py::arg("seed") = 0);

    py::class_<FaultSpec>(m, "FaultSpec")
        .def(py::init([](const std::string& mode, const std::string& target, double intensity,
                         double activation) {
                 FaultSpec f;
                 const auto parsed = fault_mode_from_string(mode);
                 if (!parsed) {
                     throw py::value_error(
                         "mode must be duration_skew, dropped_call, extra_call or wrong_target");
                 }
                 f.mode = *parsed;
                 f.target_function = target;
                 f.intensity = intensity;
                 f.activation_probability = activation;
                 return f;
             }),
             py::arg("mode"), py::arg("target"), py::arg("intensity") = 1.0,
             py::arg("activation") = 1.0);

    m.def(
        "synth_run",
        [](const WorkloadSpec& spec, std::uint64_t run_index,
           const std::optional<FaultSpec>& fault) {
            const SynthRun run = synth_run(spec, run_index, fault);
            return py::make_tuple(trace_to_text(run.trace),
                                  std::string(run.failed ? "failed" : "normal"));
        },
        py::arg("spec"), py::arg("run_index") = 0, py::arg("fault") = py::none(),
        "Returns (trace_text, label) for one synthetic run.");
}
