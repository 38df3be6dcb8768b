/*
 * facetex - Textured monocular face reconstruction by analysis-by-synthesis.
 *
 * File: tools/facetex_cli.cpp
 *
 * Copyright 2026 The facetex Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "facetex/gradcheck.hpp"
#include "facetex/image_io.hpp"
#include "facetex/optim.hpp"
#include "facetex/pipeline.hpp"
#include "facetex/render.hpp"
#include "facetex/serialization.hpp"
#include "facetex/toy_head.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

using namespace facetex;
namespace fs = std::filesystem;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_invalid = 2;
constexpr int exit_failure = 3;

nlohmann::json read_json(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void write_json(const fs::path& path, const nlohmann::json& j)
{
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << j.dump(2) << '\n';
}

struct FitArgs
{
    std::string image, mask, landmarks, basis, config, out;
    int bands = 1;
    std::optional<std::uint64_t> seed;
    std::optional<double> w_lmk, w_tex, w_vis_tex, w_id, w_reg, w_vis;
};

int run_fit(const FitArgs& a)
{
    pipeline::FitConfig config;
    if (!a.config.empty()) {
        config = pipeline::FitConfig::from_json(read_json(a.config));
    }
    if (a.seed) config.seed = *a.seed;
    if (a.w_lmk) config.weights.w_lmk = *a.w_lmk;
    if (a.w_tex) config.weights.w_tex = *a.w_tex;
    if (a.w_vis_tex) config.weights.w_vis_tex = *a.w_vis_tex;
    if (a.w_id) config.weights.w_id = *a.w_id;
    if (a.w_reg) config.weights.w_reg = *a.w_reg;
    if (a.w_vis) config.weights.w_vis = *a.w_vis;
    config.validate();

    const Image image = io::read_png(a.image);
    const BinaryMask skin = io::read_mask_png(a.mask, MaskKind::skin);
    const MatrixXd landmarks = io::read_landmarks(a.landmarks);
    const model::BlendshapeBasis basis = model::load_basis(a.basis);

    pipeline::FitOptions options;
    options.bands = a.bands;
    const auto result = pipeline::fit(config, image, skin, landmarks, basis, options);
    pipeline::export_result(result, config, basis, a.out);
    std::cout << result.metrics.to_json().dump() << '\n';
    return exit_ok;
}

int run_synth(std::uint64_t seed, const fs::path& out, int size, int texture_resolution)
{
    const auto basis = model::make_toy_head();
    const auto target = pipeline::synth_target(basis, seed, size, texture_resolution);
    fs::create_directories(out);
    model::save_basis(basis, out / "basis");
    io::write_png(out / "image.png", target.image);
    io::write_mask_png(out / "mask.png", target.skin);
    io::write_landmarks(out / "landmarks.json", target.landmarks);
    io::write_texture_png(out / "texture.png", target.texture);
    write_json(out / "params.json", io::params_to_json(target.params));
    return exit_ok;
}

int run_gradcheck(const std::string& suite, int trials, std::uint64_t seed)
{
    gradcheck::SuiteOptions options;
    options.trials = trials;
    options.seed = seed;
    bool ok = true;
    for (const auto& r : gradcheck::run_suite(suite, options)) {
        std::cout << (r.passed() ? "PASS " : "FAIL ") << r.name << " trials=" << r.trials
                  << " max_error=" << r.max_error << " tol=" << r.tolerance << '\n';
        ok = ok && r.passed();
    }
    return ok ? exit_ok : 1;
}

int run_bench(const std::string& scene, int size, int bands, int repeats)
{
    if (scene != "toyhead") {
        throw std::invalid_argument("unknown scene '" + scene + "'");
    }
    const auto basis = model::make_toy_head();
    const auto target = pipeline::synth_target(basis, 0, size);
    render::RenderOptions options;
    options.width = size;
    options.height = size;
    options.bands = bands;
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < repeats; ++i) {
        const auto out = render::render(basis, target.params, target.texture, options);
        (void)out;
    }
    const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - start;
    std::cout << "scene=" << scene << " size=" << size << " bands=" << bands << " renders=" << repeats
              << " ms_per_render=" << elapsed.count() / repeats << '\n';
    return exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"facetex: textured face reconstruction by analysis-by-synthesis"};
    app.require_subcommand(1);

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "Fit geometry, texture and light to an image");
    fit->add_option("--image", fit_args.image, "Target PNG")->required()->check(CLI::ExistingFile);
    fit->add_option("--mask", fit_args.mask, "Skin mask PNG")->required()->check(CLI::ExistingFile);
    fit->add_option("--landmarks", fit_args.landmarks, "JSON array of 68 [x, y] pairs")
        ->required()
        ->check(CLI::ExistingFile);
    fit->add_option("--basis", fit_args.basis, "Basis directory")->required()->check(CLI::ExistingDirectory);
    fit->add_option("--config", fit_args.config, "Fit configuration JSON")->check(CLI::ExistingFile);
    fit->add_option("--out", fit_args.out, "Output directory")->required();
    fit->add_option("--bands", fit_args.bands, "Rasterizer bands, 0 = all cores")->check(CLI::NonNegativeNumber);
    fit->add_option("--seed", fit_args.seed, "Overrides the config seed");
    fit->add_option("--w-lmk", fit_args.w_lmk, "Landmark loss weight");
    fit->add_option("--w-tex", fit_args.w_tex, "Texture loss weight");
    fit->add_option("--w-vis-tex", fit_args.w_vis_tex, "Multi-view texture loss weight");
    fit->add_option("--w-id", fit_args.w_id, "Identity loss weight");
    fit->add_option("--w-reg", fit_args.w_reg, "Coefficient regularizer weight");
    fit->add_option("--w-vis", fit_args.w_vis, "Visibility loss weight");

    std::uint64_t synth_seed = 0;
    std::string synth_out;
    int synth_size = 64;
    int synth_texture = 256;
    auto* synth = app.add_subcommand("synth", "Write a synthetic target rendered from the toy head");
    synth->add_option("--seed", synth_seed, "Seed")->required();
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--size", synth_size, "Render size")->check(CLI::PositiveNumber);
    synth->add_option("--texture-resolution", synth_texture, "Texture resolution")->check(CLI::PositiveNumber);

    std::string suite = "all";
    int trials = 200;
    std::uint64_t gc_seed = 1;
    auto* gc = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
    gc->add_option("--suite", suite, "'all' or a check name");
    gc->add_option("--trials", trials, "Random trials per check")->check(CLI::PositiveNumber);
    gc->add_option("--seed", gc_seed, "Seed");

    std::string scene = "toyhead";
    int bench_size = 64;
    int bench_bands = 1;
    int repeats = 20;
    auto* bench = app.add_subcommand("bench", "Time the forward renderer");
    bench->add_option("--scene", scene, "Scene")->check(CLI::IsMember({"toyhead"}));
    bench->add_option("--size", bench_size, "Render size")->check(CLI::IsMember({64, 128, 256}));
    bench->add_option("--bands", bench_bands, "Rasterizer bands, 0 = all cores")->check(CLI::NonNegativeNumber);
    bench->add_option("--repeats", repeats, "Renders to time")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_invalid;
    }

    try {
        if (*fit) return run_fit(fit_args);
        if (*synth) return run_synth(synth_seed, synth_out, synth_size, synth_texture);
        if (*gc) return run_gradcheck(suite, trials, gc_seed);
        return run_bench(scene, bench_size, bench_bands, repeats);
    } catch (const optim::OptimizationFailure& e) {
        std::cerr << "optimization failure: " << e.what() << '\n';
        return exit_failure;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return exit_invalid;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return exit_invalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_invalid;
    }
}
