#include <chrono>
#include <iostream>

#include "hopflink/coarsening.hpp"
#include "hopflink/linking_oracle.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

// Benchmark comparing the OpenMP kernels against their serial references:
// the crossing-count oracle and the per-block coarsening step.

using namespace hopflink;

namespace {

double seconds(std::chrono::steady_clock::time_point a, std::chrono::steady_clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

} // namespace

int main() {
#ifdef _OPENMP
    std::cout << "openmp threads: " << omp_get_max_threads() << "\n";
#else
    std::cout << "openmp: disabled\n";
#endif

    {
        // oracle: all strand pairs of a sizable twisted bundle
        auto wires = twisted_strands_polylines(28);
        auto t0 = std::chrono::steady_clock::now();
        auto serial = linking_oracle_serial(wires);
        auto t1 = std::chrono::steady_clock::now();
        auto parallel = linking_oracle(wires);
        auto t2 = std::chrono::steady_clock::now();
        bool equal = serial.total_hopf == parallel.total_hopf && serial.lk == parallel.lk &&
                     serial.framing == parallel.framing;
        std::cout << "linking oracle (d=28): serial " << seconds(t0, t1) << "s, parallel "
                  << seconds(t1, t2) << "s, results " << (equal ? "identical" : "DIFFER")
                  << ", total " << serial.total_hopf << "\n";
    }

    {
        TemplateTable table = TemplateTable::generate();
        CostModel model;
        CubicalMap m = random_valid_map(5, 7, table);
        auto t0 = std::chrono::steady_clock::now();
#ifdef _OPENMP
        int saved = omp_get_max_threads();
        omp_set_num_threads(1);
#endif
        auto [c1, tr1] = coarsen_step(m, table, model);
        auto t1 = std::chrono::steady_clock::now();
#ifdef _OPENMP
        omp_set_num_threads(saved);
#endif
        auto [c2, tr2] = coarsen_step(m, table, model);
        auto t2 = std::chrono::steady_clock::now();
        bool equal = tr1.total_cost == tr2.total_cost && c1.hopf_total == c2.hopf_total;
        std::cout << "coarsen_step (N=5): serial " << seconds(t0, t1) << "s, parallel "
                  << seconds(t1, t2) << "s, results " << (equal ? "identical" : "DIFFER")
                  << ", cost " << tr1.total_cost.str() << "\n";
    }
    return 0;
}
