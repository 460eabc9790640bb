#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "hafcp/augment.hpp"
#include "hafcp/dataset.hpp"
#include "hafcp/error.hpp"
#include "hafcp/fuzzify.hpp"
#include "hafcp/gbdt.hpp"
#include "hafcp/metrics.hpp"
#include "hafcp/miner.hpp"
#include "hafcp/pipeline.hpp"
#include "hafcp/shapiro_wilk.hpp"

namespace py = pybind11;
using namespace hafcp;

namespace {

std::vector<std::uint8_t> labels_of(const ColumnarDataset& ds) { return {ds.labels().begin(), ds.labels().end()}; }

// Runs a pipeline step and returns its log text.
std::string run_step(void (*step)(const PipelineConfig&, std::ostream&), const PipelineConfig& cfg) {
  std::ostringstream log;
  {
    py::gil_scoped_release release;
    step(cfg, log);
  }
  return log.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Highly associated fuzzy churn pattern mining";

  // Instances carry the error name in `.code`, e.g. "UnparseableCell".
  static py::handle error_type = py::exception<Error>(m, "HafcpError").release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      py::setattr(exc, "code", py::str(std::string(to_string(e.code()))));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  // dataset
  py::class_<ColumnarDataset>(m, "Dataset")
      .def_property_readonly("n_rows", &ColumnarDataset::n_rows)
      .def_property_readonly("feature_names", &ColumnarDataset::feature_names)
      .def_property_readonly("labels", &labels_of)
      .def_property_readonly("row_ids", &ColumnarDataset::row_ids)
      .def_property_readonly("fingerprint", &ColumnarDataset::fingerprint)
      .def("column", py::overload_cast<std::string_view>(&ColumnarDataset::column, py::const_), py::arg("name"))
      .def("kind", [](const ColumnarDataset& ds, std::string_view name) {
        const auto idx = ds.find(name);
        if (!idx) throw Error(ErrorCode::UnknownColumn, std::string(name));
        return std::string(to_string(ds.schema()[*idx].kind));
      })
      .def("categories", [](const ColumnarDataset& ds, std::string_view name) {
        const auto idx = ds.find(name);
        if (!idx) throw Error(ErrorCode::UnknownColumn, std::string(name));
        return ds.schema()[*idx].categories;
      })
      .def("with_column", &ColumnarDataset::with_numeric_column, py::arg("name"), py::arg("values"));

  m.def("load_csv", &load_csv, py::arg("path"), py::arg("label_column") = "Churn", py::arg("positive_label") = "1");
  m.def("parse_csv", &parse_dataset, py::arg("text"), py::arg("label_column") = "Churn",
        py::arg("positive_label") = "1");
  m.def(
      "split",
      [](const ColumnarDataset& ds, double train_fraction, std::uint64_t seed) {
        return split(ds, {train_fraction, seed});
      },
      py::arg("dataset"), py::arg("train_fraction") = 0.8, py::arg("seed") = 0);
  m.def(
      "drop_columns",
      [](const ColumnarDataset& ds, const std::vector<std::string>& names) { return drop_columns(ds, names); },
      py::arg("dataset"), py::arg("names"));

  // gbdt and metrics
  py::class_<BoostParams>(m, "BoostParams")
      .def(py::init<>())
      .def_readwrite("max_depth", &BoostParams::max_depth)
      .def_readwrite("learning_rate", &BoostParams::learning_rate)
      .def_readwrite("n_estimators", &BoostParams::n_estimators)
      .def_readwrite("min_child_weight", &BoostParams::min_child_weight)
      .def_readwrite("lambda_l2", &BoostParams::lambda_l2)
      .def_readwrite("seed", &BoostParams::seed);

  py::class_<BoostedModel>(m, "Model")
      .def_readonly("base_score", &BoostedModel::base_score)
      .def_readonly("feature_names", &BoostedModel::feature_names)
      .def_property_readonly("n_trees", [](const BoostedModel& b) { return b.trees.size(); })
      .def("to_json", &model_to_json)
      .def_static("from_json", &model_from_json);

  py::class_<Metrics>(m, "Metrics")
      .def_property_readonly("auc", [](const Metrics& x) -> py::object {
        return x.auc_defined ? py::cast(x.auc) : py::none();
      })
      .def_readonly("accuracy", &Metrics::accuracy)
      .def_readonly("recall", &Metrics::recall)
      .def_readonly("precision", &Metrics::precision)
      .def_readonly("f1", &Metrics::f1)
      .def("__repr__", [](const Metrics& x) {
        std::ostringstream s;
        s << "Metrics(auc=" << x.auc << ", accuracy=" << x.accuracy << ", recall=" << x.recall
          << ", precision=" << x.precision << ", f1=" << x.f1 << ")";
        return s.str();
      });

  m.def(
      "train",
      [](const ColumnarDataset& ds, const BoostParams& p) {
        py::gil_scoped_release release;
        return train(ds, p);
      },
      py::arg("dataset"), py::arg("params") = BoostParams{});
  m.def(
      "train_with_trace",
      [](const ColumnarDataset& ds, const BoostParams& p) {
        TrainTrace trace;
        auto model = train(ds, p, &trace);
        return std::make_pair(std::move(model), trace.log_loss);
      },
      py::arg("dataset"), py::arg("params") = BoostParams{});
  m.def("predict_proba", &predict_proba, py::arg("model"), py::arg("dataset"));
  m.def("predict_margin", &predict_margin, py::arg("model"), py::arg("dataset"));
  m.def("path_contributions", &path_contributions, py::arg("model"), py::arg("dataset"));
  m.def(
      "evaluate",
      [](const std::vector<std::uint8_t>& y, const std::vector<double>& p, double threshold) {
        return evaluate(y, p, threshold);
      },
      py::arg("y_true"), py::arg("y_prob"), py::arg("threshold") = 0.5);

  py::class_<ImportanceTable>(m, "ImportanceTable")
      .def_property_readonly("method", [](const ImportanceTable& t) { return std::string(to_string(t.method)); })
      .def_readonly("scores", &ImportanceTable::scores)
      .def("score", &ImportanceTable::score)
      .def("to_csv", &importance_to_csv, py::arg("comment") = "");
  m.def(
      "importance",
      [](const BoostedModel& model, const ColumnarDataset& ds, const std::string& method) {
        return importance(model, ds, importance_method_from_string(method));
      },
      py::arg("model"), py::arg("dataset"), py::arg("method") = "gain");
  m.def("load_importance", &load_importance, py::arg("path"));
  m.def("parse_importance", &parse_importance, py::arg("text"));

  // fuzzify
  py::class_<NormalityResult>(m, "NormalityResult")
      .def_readonly("w", &NormalityResult::w_statistic)
      .def_readonly("p", &NormalityResult::p_value)
      .def_readonly("alpha", &NormalityResult::alpha)
      .def_readonly("is_gaussian", &NormalityResult::is_gaussian);
  m.def(
      "shapiro_wilk", [](const std::vector<double>& x, double alpha) { return shapiro_wilk(x, alpha); },
      py::arg("x"), py::arg("alpha") = 0.05);
  m.def("triangular_mu", &triangular_mu, py::arg("x"), py::arg("a"), py::arg("b"), py::arg("c"));
  m.def("gaussian_mu", &gaussian_mu, py::arg("x"), py::arg("center"), py::arg("width"));

  py::class_<MembershipSpec>(m, "MembershipSpec")
      .def_readonly("column", &MembershipSpec::column)
      .def_property_readonly("family", [](const MembershipSpec& s) { return std::string(to_string(s.family)); })
      .def_readonly("normality", &MembershipSpec::normality)
      .def("memberships", &MembershipSpec::memberships, py::arg("x"))
      .def("assign", [](const MembershipSpec& s, double x) {
        const auto a = assign_term(x, s);
        return std::make_pair(std::string(suffix(a.term)), a.membership);
      });
  m.def(
      "fit_specs",
      [](const ColumnarDataset& train, double alpha, std::uint64_t seed) { return fit_specs(train, {alpha, seed}); },
      py::arg("train"), py::arg("alpha") = 0.05, py::arg("seed") = 0);

  py::class_<BinaryFrame>(m, "BinaryFrame")
      .def_readonly("n_rows", &BinaryFrame::n_rows)
      .def_property_readonly("items",
                             [](const BinaryFrame& f) {
                               std::vector<std::string> out;
                               for (const auto& i : f.items) out.push_back(i.name);
                               return out;
                             })
      .def("at", &BinaryFrame::at, py::arg("row"), py::arg("item"))
      .def("membership_at", &BinaryFrame::membership_at, py::arg("row"), py::arg("item"))
      .def("to_json", &frame_to_json)
      .def_static("from_json", &frame_from_json);
  m.def(
      "to_binary_frame",
      [](const ColumnarDataset& ds, const std::vector<MembershipSpec>& specs) { return to_binary_frame(ds, specs); },
      py::arg("dataset"), py::arg("specs"));

  // miner
  py::class_<Pattern>(m, "Pattern")
      .def(py::init([](std::vector<std::string> items) {
             std::sort(items.begin(), items.end());
             return Pattern{std::move(items), 0.0, 0};
           }),
           py::arg("items"))
      .def_readonly("items", &Pattern::items)
      .def_readonly("utility", &Pattern::utility)
      .def_readonly("support", &Pattern::support)
      .def("__eq__", [](const Pattern& a, const Pattern& b) { return a == b; })
      .def("__repr__", [](const Pattern& p) { return pattern_to_json_line(p, 0); });

  py::class_<TransactionDB>(m, "TransactionDB")
      .def_readonly("items", &TransactionDB::items)
      .def_property_readonly("n_transactions", [](const TransactionDB& d) { return d.transactions.size(); });

  m.def(
      "build_transactions",
      [](const BinaryFrame& frame, const ImportanceTable& imp, const std::string& mode) {
        return build_transactions(frame, imp, utility_mode_from_string(mode));
      },
      py::arg("frame"), py::arg("importance"), py::arg("mode") = "binary");

  auto mining = [](auto fn) {
    return [fn](const TransactionDB& db, const ProfitTable& pt, std::size_t k, std::size_t min_length,
                std::optional<std::size_t> max_length) { return fn(db, pt, MiningConfig{k, min_length, max_length}); };
  };
  m.def("mine_topk", mining(&mine_topk), py::arg("db"), py::arg("profits"), py::arg("k") = 5,
        py::arg("min_length") = 2, py::arg("max_length") = py::none());
  m.def("brute_force_topk", mining(&brute_force_topk), py::arg("db"), py::arg("profits"), py::arg("k") = 5,
        py::arg("min_length") = 2, py::arg("max_length") = py::none());
  m.def("beam_topk", mining(&beam_topk), py::arg("db"), py::arg("profits"), py::arg("k") = 5,
        py::arg("min_length") = 2, py::arg("max_length") = py::none());
  m.def(
      "utility",
      [](const TransactionDB& db, const ProfitTable& pt, const std::vector<std::string>& items) {
        const auto r = utility(db, pt, items);
        return std::make_pair(r.utility, r.support);
      },
      py::arg("db"), py::arg("profits"), py::arg("items"));

  // augment
  m.def(
      "pattern_feature",
      [](const Pattern& p, const BinaryFrame& frame) { return pattern_feature(p, frame).values; },
      py::arg("pattern"), py::arg("frame"));
  m.def(
      "evaluate_with_pattern",
      [](const ColumnarDataset& train, const ColumnarDataset& test, const std::vector<MembershipSpec>& specs,
         const Pattern& p, const BoostParams& params) {
        py::gil_scoped_release release;
        return evaluate_with_pattern(train, test, specs, p, params);
      },
      py::arg("train"), py::arg("test"), py::arg("specs"), py::arg("pattern"), py::arg("params") = BoostParams{});
  m.def("evaluate_baseline", [](const ColumnarDataset& train, const ColumnarDataset& test,
                                const BoostParams& params) { return evaluate_baseline(train, test, params); },
        py::arg("train"), py::arg("test"), py::arg("params") = BoostParams{});

  // pipeline
  py::class_<PipelineConfig>(m, "PipelineConfig")
      .def(py::init<>())
      .def("set", &PipelineConfig::set, py::arg("key"), py::arg("value"))
      .def("to_json", &PipelineConfig::to_json)
      .def("fingerprint", &PipelineConfig::fingerprint)
      .def_static("from_json", &PipelineConfig::from_json)
      .def_static("keys", &PipelineConfig::keys);
  m.def("cmd_train", [](const PipelineConfig& c) { return run_step(&cmd_train, c); }, py::arg("config"));
  m.def("cmd_fuzzify", [](const PipelineConfig& c) { return run_step(&cmd_fuzzify, c); }, py::arg("config"));
  m.def("cmd_mine", [](const PipelineConfig& c) { return run_step(&cmd_mine, c); }, py::arg("config"));
  m.def("cmd_report", [](const PipelineConfig& c) { return run_step(&cmd_report, c); }, py::arg("config"));
  m.def("cmd_pipeline", [](const PipelineConfig& c) { return run_step(&cmd_pipeline, c); }, py::arg("config"));
}
