// How fast unweighted instance counting converges to the branch weights as
// the instance count m grows. Prints one row per m.

#include <cstdio>

#include "singletsim/instances.hpp"

using namespace singletsim;

int main() {
    const BranchWeights w({0.8, 0.15, 0.05});
    const std::size_t repetitions = 20'000;

    std::printf("%6s  %10s  %10s  %10s  %12s\n", "m", "mean_n1", "mean_n2", "mean_n3",
                "max |dev|");
    for (std::size_t m : {1, 2, 5, 10, 50, 100, 1000}) {
        RngStream rng(7, m);
        const auto r = born_limit_demo(w, m, repetitions, rng);
        std::printf("%6zu  %10.5f  %10.5f  %10.5f  %12.5f\n", m, r.mean_occupation[0],
                    r.mean_occupation[1], r.mean_occupation[2], r.max_deviation);
    }
    std::printf("\nweights: 0.8 0.15 0.05; %zu repetitions per row\n", repetitions);
    return 0;
}
