// Generates the bundled synthetic perception samples.
//
//   gen_samples surface <out.csv> [noise_sd] [seed]
//   gen_samples curve prompt|edge <out.csv> [noise_sd] [seed]
//   gen_samples params surface|prompt|edge <out.json>
//
// Points lie on a BER grid {0} U logspace(1e-5, 0.5, 23) per axis, evaluated
// on the bundled default surface / curves, plus N(0, noise_sd^2) noise
// clipped to [0, 1]. `params` writes the bundled default parameter document.

#include "semalloc/perception.hpp"
#include "semalloc/perception_io.hpp"
#include "semalloc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

std::vector<double> ber_grid()
{
    std::vector<double> g{0.0};
    constexpr int n = 23;
    for (int i = 0; i < n; ++i) {
        g.push_back(1e-5 * std::pow(0.5 / 1e-5, static_cast<double>(i) / (n - 1)));
    }
    return g;
}

double noisy(semalloc::Rng& rng, double v, double sd)
{
    return std::clamp(v + sd * rng.normal(), 0.0, 1.0);
}

} // namespace

int main(int argc, char** argv)
{
    using namespace semalloc;
    const std::vector<std::string> args(argv + 1, argv + argc);
    if (args.size() >= 2 && args[0] == "surface") {
        const double sd = args.size() > 2 ? std::stod(args[2]) : 0.0;
        Rng rng(RandomSeed{args.size() > 3 ? std::stoull(args[3]) : 2024ULL});
        const auto s = perception::default_surface();
        SampleSet rows;
        for (double a : ber_grid()) {
            for (double b : ber_grid()) {
                rows.push_back({a, b, noisy(rng, eval_surface(s, a, b), sd)});
            }
        }
        std::ofstream out(args[1]);
        io::write_samples(out, rows);
        return out ? 0 : 1;
    }
    if (args.size() >= 3 && args[0] == "curve" && (args[1] == "prompt" || args[1] == "edge")) {
        const double sd = args.size() > 3 ? std::stod(args[3]) : 0.0;
        Rng rng(RandomSeed{args.size() > 4 ? std::stoull(args[4]) : 2024ULL});
        const auto c = args[1] == "prompt" ? perception::default_prompt_curve() : perception::default_edge_curve();
        CurveSampleSet rows;
        for (double a : ber_grid()) {
            rows.push_back({a, noisy(rng, eval_curve(c, a), sd)});
        }
        std::ofstream out(args[2]);
        io::write_samples(out, rows);
        return out ? 0 : 1;
    }
    if (args.size() == 3 && args[0] == "params") {
        nlohmann::json doc;
        if (args[1] == "surface") {
            doc = io::to_json(perception::default_surface());
        } else if (args[1] == "prompt") {
            doc = io::to_json(perception::default_prompt_curve());
        } else if (args[1] == "edge") {
            doc = io::to_json(perception::default_edge_curve());
        } else {
            return 2;
        }
        std::ofstream out(args[2]);
        out << doc.dump(2) << '\n';
        return out ? 0 : 1;
    }
    std::cerr << "usage: gen_samples surface <out.csv> [noise_sd] [seed]\n"
                 "       gen_samples curve prompt|edge <out.csv> [noise_sd] [seed]\n"
                 "       gen_samples params surface|prompt|edge <out.json>\n";
    return 2;
}
