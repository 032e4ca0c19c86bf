#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fcvi/bench.hpp"
#include "fcvi/engine.hpp"
#include "fcvi/storage.hpp"

namespace py = pybind11;

namespace {

fcvi::FloatMatrix to_float_matrix(const py::array_t<float, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 2) throw std::invalid_argument("expected a 2-d array");
    fcvi::FloatMatrix m(std::size_t(arr.shape(0)), std::size_t(arr.shape(1)));
    std::memcpy(m.data.data(), arr.data(), m.data.size() * sizeof(float));
    return m;
}

fcvi::Matrix to_matrix(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 2) throw std::invalid_argument("expected a 2-d array");
    fcvi::Matrix m(std::size_t(arr.shape(0)), std::size_t(arr.shape(1)));
    std::memcpy(m.data.data(), arr.data(), m.data.size() * sizeof(double));
    return m;
}

std::vector<double> to_vec(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 1) throw std::invalid_argument("expected a 1-d array");
    return {arr.data(), arr.data() + arr.shape(0)};
}

py::array_t<double> from_vec(const std::vector<double>& v) {
    py::array_t<double> out(py::ssize_t(v.size()));
    std::memcpy(out.mutable_data(), v.data(), v.size() * sizeof(double));
    return out;
}

py::array_t<float> from_float_matrix(const fcvi::FloatMatrix& m) {
    py::array_t<float> out({py::ssize_t(m.rows), py::ssize_t(m.cols)});
    std::memcpy(out.mutable_data(), m.data.data(), m.data.size() * sizeof(float));
    return out;
}

py::array_t<double> from_matrix(const fcvi::Matrix& m) {
    py::array_t<double> out({py::ssize_t(m.rows), py::ssize_t(m.cols)});
    std::memcpy(out.mutable_data(), m.data.data(), m.data.size() * sizeof(double));
    return out;
}

py::list hits_to_list(const fcvi::QueryResult& result) {
    py::list out;
    for (const auto& h : result.hits) {
        py::dict d;
        d["id"] = h.id;
        d["vector_sim"] = h.vector_sim;
        d["filter_sim"] = h.filter_sim;
        d["score"] = h.score;
        out.append(d);
    }
    return out;
}

class PyIndex {
public:
    static PyIndex build(py::array_t<float, py::array::c_style | py::array::forcecast> vectors,
                         py::array_t<float, py::array::c_style | py::array::forcecast> filters,
                         const std::string& schema_json, const std::string& variant, double alpha,
                         const std::string& backend, std::uint64_t seed, std::size_t clusters_k,
                         std::size_t hnsw_m, std::size_t hnsw_efc) {
        fcvi::RecordStore store;
        store.schema = fcvi::FilterSchema::from_json_string(schema_json);
        store.vectors = to_float_matrix(vectors);
        store.filters = to_float_matrix(filters);
        fcvi::BuildOptions opts;
        opts.variant = fcvi::variant_from_name(variant);
        opts.alpha = alpha;
        opts.seed = seed;
        opts.clusters_k = clusters_k;
        opts.backend = fcvi::backend_from_name(backend);
        opts.hnsw = fcvi::HnswParams{hnsw_m, hnsw_efc};
        return PyIndex(fcvi::FcviIndex::build(std::move(store), opts));
    }

    static PyIndex load(const std::string& path) { return PyIndex(fcvi::storage::load_index(path)); }

    void save(const std::string& path) const { fcvi::storage::save_index(index_, path); }

    py::list query(py::array_t<float, py::array::c_style | py::array::forcecast> q,
                   const std::string& filter_expr, std::size_t k, double lambda, double c,
                   std::size_t probes, std::size_t ef_search) const {
        if (q.ndim() != 1) throw std::invalid_argument("expected a 1-d query vector");
        auto qf = fcvi::parse_filter_expr(filter_expr, index_.store().schema);
        fcvi::SearchParams params;
        params.k = k;
        params.lambda = lambda;
        params.c = c;
        params.probes = probes;
        params.ef_search = ef_search;
        std::span<const float> qs(q.data(), std::size_t(q.shape(0)));
        return hits_to_list(index_.query(qs, qf, params));
    }

    std::uint32_t insert(py::array_t<float, py::array::c_style | py::array::forcecast> v,
                         py::array_t<float, py::array::c_style | py::array::forcecast> f) {
        if (v.ndim() != 1 || f.ndim() != 1) throw std::invalid_argument("expected 1-d arrays");
        std::span<const float> vs(v.data(), std::size_t(v.shape(0)));
        std::span<const float> fs(f.data(), std::size_t(f.shape(0)));
        return index_.insert(vs, fs);
    }

    void mark_deleted(std::uint32_t id) { index_.mark_deleted(id); }

    std::size_t size() const { return index_.size(); }
    std::size_t dim() const { return index_.store().dim(); }
    std::size_t filter_dim() const { return index_.store().filter_dim(); }
    std::string schema_json() const { return index_.store().schema.to_json_string(); }
    std::string config_json() const { return index_.config().to_json_string(); }

private:
    explicit PyIndex(fcvi::FcviIndex idx) : index_(std::move(idx)) {}
    fcvi::FcviIndex index_;
};

py::dict gen_synthetic_py(std::size_t n, std::size_t d, std::size_t m, std::size_t clusters,
                          double selectivity, std::size_t queries, std::uint64_t seed) {
    fcvi::bench::WorkloadSpec spec;
    spec.n = n;
    spec.d = d;
    spec.m = m;
    spec.clusters = clusters;
    spec.selectivity = selectivity;
    spec.query_count = queries;
    spec.seed = seed;
    auto wl = fcvi::bench::gen_synthetic(spec);
    py::dict out;
    out["vectors"] = from_float_matrix(wl.records.vectors);
    out["filters"] = from_float_matrix(wl.records.filters);
    out["schema"] = wl.records.schema.to_json_string();
    py::list qs;
    for (const auto& q : wl.queries) {
        py::dict e;
        py::array_t<float> vec(py::ssize_t(q.vector.size()));
        std::memcpy(vec.mutable_data(), q.vector.data(), q.vector.size() * sizeof(float));
        e["vector"] = vec;
        e["filter"] = q.filter.to_json_string();
        qs.append(e);
    }
    out["queries"] = qs;
    return out;
}

}  // namespace

PYBIND11_MODULE(fcvi, mod) {
    mod.doc() = "Filter-centric vector indexing: geometric filter transformation over ANN search";

    mod.def(
        "psi_partition",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> v,
           py::array_t<double, py::array::c_style | py::array::forcecast> f, double alpha) {
            return from_vec(fcvi::psi_partition(to_vec(v), to_vec(f), alpha));
        },
        py::arg("v"), py::arg("f"), py::arg("alpha"),
        "Segment-wise scaled subtraction of the filter vector");
    mod.def(
        "psi_cluster",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> v,
           py::array_t<double, py::array::c_style | py::array::forcecast> f, double alpha,
           py::array_t<double, py::array::c_style | py::array::forcecast> centers) {
            return from_vec(fcvi::psi_cluster(to_vec(v), to_vec(f), alpha, to_matrix(centers)));
        },
        py::arg("v"), py::arg("f"), py::arg("alpha"), py::arg("centers"));
    mod.def(
        "psi_embedding",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> v,
           py::array_t<double, py::array::c_style | py::array::forcecast> f, double alpha,
           py::array_t<double, py::array::c_style | py::array::forcecast> w) {
            return from_vec(fcvi::psi_embedding(to_vec(v), to_vec(f), alpha, to_matrix(w)));
        },
        py::arg("v"), py::arg("f"), py::arg("alpha"), py::arg("w"));
    mod.def(
        "fit_filter_clusters",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> filters, std::size_t k,
           std::uint64_t seed) { return from_matrix(fcvi::fit_filter_clusters(to_matrix(filters), k, seed)); },
        py::arg("filters"), py::arg("k"), py::arg("seed") = 0);
    mod.def("optimal_alpha", &fcvi::optimal_alpha, py::arg("lambda_"));
    mod.def("separation_alpha", &fcvi::separation_alpha, py::arg("vector_diameter"),
            py::arg("filter_gap"), py::arg("padded_dim"), py::arg("filter_dim"));
    mod.def("compute_k_prime", &fcvi::compute_k_prime, py::arg("k"), py::arg("lambda_"),
            py::arg("alpha"), py::arg("c"), py::arg("n"));
    mod.def(
        "similarity",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> a,
           py::array_t<double, py::array::c_style | py::array::forcecast> b) {
            auto av = to_vec(a);
            auto bv = to_vec(b);
            return fcvi::similarity(av, bv);
        },
        py::arg("a"), py::arg("b"));
    mod.def("gen_synthetic", &gen_synthetic_py, py::arg("n"), py::arg("d"), py::arg("m"),
            py::arg("clusters") = 8, py::arg("selectivity") = 0.05, py::arg("queries") = 100,
            py::arg("seed") = 42);

    py::class_<PyIndex>(mod, "Index")
        .def_static("build", &PyIndex::build, py::arg("vectors"), py::arg("filters"),
                    py::arg("schema"), py::arg("variant") = "partition", py::arg("alpha") = 1.0,
                    py::arg("backend") = "hnsw", py::arg("seed") = 0, py::arg("clusters_k") = 0,
                    py::arg("hnsw_m") = 16, py::arg("hnsw_efc") = 200)
        .def_static("load", &PyIndex::load, py::arg("path"))
        .def("save", &PyIndex::save, py::arg("path"))
        .def("query", &PyIndex::query, py::arg("q"), py::arg("filter"), py::arg("k") = 10,
             py::arg("lambda_") = 0.5, py::arg("c") = 4.0, py::arg("probes") = 1,
             py::arg("ef_search") = 64)
        .def("insert", &PyIndex::insert, py::arg("vector"), py::arg("filter"))
        .def("mark_deleted", &PyIndex::mark_deleted, py::arg("id"))
        .def("size", &PyIndex::size)
        .def("dim", &PyIndex::dim)
        .def("filter_dim", &PyIndex::filter_dim)
        .def("schema_json", &PyIndex::schema_json)
        .def("config_json", &PyIndex::config_json);
}
