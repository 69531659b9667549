#include "epr/analysis.hpp"
#include "epr/coincidence.hpp"
#include "epr/dataset_io.hpp"
#include "epr/model.hpp"
#include "epr/optics.hpp"
#include "epr/scansim.hpp"
#include "epr/schmidt.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace epr;

PYBIND11_MODULE(_core, m) {
    m.doc() = "SPDC raster-scan simulator and EPR/Schmidt analysis core";

    py::enum_<PlaneMode>(m, "PlaneMode")
        .value("NearField", PlaneMode::NearField)
        .value("FarField", PlaneMode::FarField);
    py::enum_<Axis>(m, "Axis").value("X", Axis::X).value("Y", Axis::Y);
    py::enum_<Direction>(m, "Direction")
        .value("Infer1From2", Direction::Infer1From2)
        .value("Infer2From1", Direction::Infer2From1);

    py::class_<SourceParams>(m, "SourceParams")
        .def(py::init<>())
        .def_static("defaults", &SourceParams::defaults)
        .def_static("from_pump", &SourceParams::from_pump, py::arg("fwhm_um"))
        .def_readwrite("lambda_pump_nm", &SourceParams::lambda_pump_nm)
        .def_readwrite("lambda_signal_nm", &SourceParams::lambda_signal_nm)
        .def_readwrite("pump_waist_fwhm_um", &SourceParams::pump_waist_fwhm_um)
        .def_readwrite("sigma_plus_mm", &SourceParams::sigma_plus_mm)
        .def_readwrite("sigma_minus_mm", &SourceParams::sigma_minus_mm)
        .def_readwrite("q_ring_per_mm", &SourceParams::q_ring_per_mm)
        .def_readwrite("pair_rate_hz", &SourceParams::pair_rate_hz)
        .def("validate", &SourceParams::validate);

    py::class_<LensConfig>(m, "LensConfig")
        .def(py::init<>())
        .def_static("near_field", &LensConfig::near_field,
                    py::arg("params") = SourceParams::defaults())
        .def_static("far_field", &LensConfig::far_field,
                    py::arg("params") = SourceParams::defaults())
        .def_readwrite("f1_mm", &LensConfig::f1_mm)
        .def_readwrite("f2_mm", &LensConfig::f2_mm)
        .def_readwrite("f3_mm", &LensConfig::f3_mm)
        .def_readwrite("mode", &LensConfig::mode)
        .def_readwrite("lambda_signal_nm", &LensConfig::lambda_signal_nm)
        .def("magnification_nf", &LensConfig::magnification_nf)
        .def("demagnification_ff", &LensConfig::demagnification_ff)
        .def("effective_focal_mm", &LensConfig::effective_focal_mm)
        .def("momentum_scale", &LensConfig::momentum_scale);

    py::class_<ScanGrid>(m, "ScanGrid")
        .def(py::init<>())
        .def_readwrite("n_steps", &ScanGrid::n_steps)
        .def_readwrite("step_um", &ScanGrid::step_um)
        .def_readwrite("center1_um", &ScanGrid::center1_um)
        .def_readwrite("center2_um", &ScanGrid::center2_um)
        .def("total_points", &ScanGrid::total_points);

    py::class_<NoiseModel>(m, "NoiseModel")
        .def(py::init<>())
        .def_readwrite("dwell_s", &NoiseModel::dwell_s)
        .def_readwrite("window_ps", &NoiseModel::window_ps)
        .def_readwrite("dark1_hz", &NoiseModel::dark1_hz)
        .def_readwrite("dark2_hz", &NoiseModel::dark2_hz)
        .def_readwrite("collection_sigma_um", &NoiseModel::collection_sigma_um)
        .def_readwrite("efficiency1", &NoiseModel::efficiency1)
        .def_readwrite("efficiency2", &NoiseModel::efficiency2);

    py::class_<ScanRecord>(m, "ScanRecord")
        .def_readonly("i1", &ScanRecord::i1)
        .def_readonly("j1", &ScanRecord::j1)
        .def_readonly("i2", &ScanRecord::i2)
        .def_readonly("j2", &ScanRecord::j2)
        .def_readonly("s1", &ScanRecord::s1)
        .def_readonly("s2", &ScanRecord::s2)
        .def_readonly("cc", &ScanRecord::cc)
        .def_readonly("dwell_s", &ScanRecord::dwell_s);

    py::class_<ScanDataset>(m, "ScanDataset")
        .def_readonly("mode", &ScanDataset::mode)
        .def_readonly("grid", &ScanDataset::grid)
        .def_readonly("source", &ScanDataset::source)
        .def_readonly("lens", &ScanDataset::lens)
        .def_readonly("noise", &ScanDataset::noise)
        .def_readonly("seed", &ScanDataset::seed)
        .def_readonly("records", &ScanDataset::records)
        .def("at", &ScanDataset::at, py::return_value_policy::reference_internal);

    m.def("joint_position_density", &joint_position_density, py::arg("r1_mm"),
          py::arg("r2_mm"), py::arg("params"));
    m.def("joint_momentum_density", &joint_momentum_density, py::arg("q1_per_mm"),
          py::arg("q2_per_mm"), py::arg("params"));
    m.def(
        "schmidt_oracle",
        [](const SourceParams& p, int grid_n, double extent_mm) {
            if (extent_mm <= 0.0) extent_mm = 6.0 * p.sigma_plus_mm;
            return schmidt_oracle(p, grid_n, extent_mm);
        },
        py::arg("params"), py::arg("grid_n") = 256, py::arg("extent_mm") = 0.0);
    m.def("schmidt_closed_form", &schmidt_closed_form);
    m.def("conditional_position_variance", &conditional_position_variance);
    m.def("conditional_momentum_variance", &conditional_momentum_variance);

    m.def("detector_to_object",
          py::overload_cast<double, const LensConfig&>(&detector_to_object));
    m.def("detector_to_momentum",
          py::overload_cast<double, const LensConfig&>(&detector_to_momentum));

    py::class_<PointRates>(m, "PointRates")
        .def_readonly("s1_hz", &PointRates::s1_hz)
        .def_readonly("s2_hz", &PointRates::s2_hz)
        .def_readonly("cc_hz", &PointRates::cc_hz);
    m.def("expected_rates", &expected_rates);
    m.def("simulate_scan", &simulate_scan, py::arg("params"), py::arg("lens"),
          py::arg("grid"), py::arg("noise"), py::arg("seed"),
          py::arg("threads") = 0,
          py::call_guard<py::gil_scoped_release>());
    m.def("generate_timetags", &generate_timetags, py::arg("rate1_hz"),
          py::arg("rate2_hz"), py::arg("pair_rate_hz"), py::arg("jitter_ps"),
          py::arg("duration_s"), py::arg("seed"));

    py::class_<TagStream>(m, "TagStream")
        .def(py::init<>())
        .def_readwrite("tags_ps", &TagStream::tags_ps)
        .def_readwrite("channel", &TagStream::channel);
    m.def("count_coincidences", &count_coincidences, py::arg("a"), py::arg("b"),
          py::arg("window_ps"));
    m.def(
        "count_coincidences",
        [](const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b,
           std::int64_t w) {
            TagStream sa, sb;
            sa.tags_ps = a;
            sb.tags_ps = b;
            return count_coincidences(sa, sb, w);
        },
        py::arg("a"), py::arg("b"), py::arg("window_ps"));
    m.def("accidental_rate_hz", &accidental_rate_hz);

    m.def("normalize", &normalize, py::arg("cc"), py::arg("s1"), py::arg("s2"));

    py::class_<VarianceEstimate>(m, "VarianceEstimate")
        .def_readonly("value", &VarianceEstimate::value)
        .def_readonly("err", &VarianceEstimate::err)
        .def_readonly("n_slices", &VarianceEstimate::n_slices);
    m.def("min_inferred_variance", &min_inferred_variance);

    py::class_<EprEntry>(m, "EprEntry")
        .def_readonly("product", &EprEntry::product)
        .def_readonly("err", &EprEntry::err)
        .def_readonly("violation", &EprEntry::violation)
        .def_readonly("significance", &EprEntry::significance);
    m.def(
        "epr_test",
        [](double pos, double pos_err, double mom, double mom_err) {
            return epr_test({pos, pos_err}, {mom, mom_err});
        },
        py::arg("position_variance_mm2"), py::arg("position_err_mm2"),
        py::arg("momentum_variance_per_mm2"), py::arg("momentum_err_per_mm2"));

    py::class_<EprReportRow>(m, "EprReportRow")
        .def_readonly("axis", &EprReportRow::axis)
        .def_readonly("dir", &EprReportRow::dir)
        .def_readonly("position", &EprReportRow::position)
        .def_readonly("momentum", &EprReportRow::momentum)
        .def_readonly("epr", &EprReportRow::epr);
    py::class_<EprReport>(m, "EprReport")
        .def_readonly("rows", &EprReport::rows);
    m.def("analyze_pair", &analyze_pair,
          py::call_guard<py::gil_scoped_release>());
    m.def("format_report_table", &format_report_table);

    py::class_<BirthRegionResult>(m, "BirthRegionResult")
        .def_readonly("diameter_um", &BirthRegionResult::diameter_um)
        .def_readonly("err_um", &BirthRegionResult::err_um)
        .def_readonly("arm1_um", &BirthRegionResult::arm1_um)
        .def_readonly("arm2_um", &BirthRegionResult::arm2_um);
    m.def("birth_region", &birth_region);

    py::class_<IntensityGrid>(m, "IntensityGrid")
        .def_readonly("n", &IntensityGrid::n)
        .def_readonly("coord0", &IntensityGrid::coord0)
        .def_readonly("dcoord", &IntensityGrid::dcoord)
        .def_readonly("mode", &IntensityGrid::mode)
        .def_readwrite("values", &IntensityGrid::values);
    m.def("singles_to_intensity", &singles_to_intensity, py::arg("dataset"),
          py::arg("arm"), py::arg("lens"));
    py::class_<SchmidtEstimate>(m, "SchmidtEstimate")
        .def_readonly("k", &SchmidtEstimate::k)
        .def_readonly("err", &SchmidtEstimate::err)
        .def_readonly("k_uncorrected", &SchmidtEstimate::k_uncorrected);
    m.def("estimate_schmidt", &estimate_schmidt, py::arg("nf"), py::arg("ff"),
          py::arg("n_bootstrap") = 200, py::arg("seed") = 1);
    m.def("model_intensity_grid", &model_intensity_grid);

    m.def("write_dataset", &write_dataset);
    m.def("read_dataset", &read_dataset);
}
