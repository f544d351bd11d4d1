#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <json.hpp>

#include "fixtures.hpp"
#include "specshift/dataset_io.hpp"
#include "specshift/metrics.hpp"

using fixture::TempDir;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

Run cli(const TempDir& dir, const std::string& args) {
    const std::string cmd = "cd '" + dir.path().string() + "' && '" SPECSHIFT_CLI_PATH "' " + args + " > stdout.txt 2> stderr.txt";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = fixture::slurp(dir / "stdout.txt");
    r.err = fixture::slurp(dir / "stderr.txt");
    return r;
}

const std::string kSmall = "--image-size 32 --n-train 6 --n-test 4 --defect dot:spot:4:0.005:0.009 --defect blotch:blob:3:0.04:0.06";
const std::string kModel = "--image-size 32 --patch 8 --stride 4";

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("gen-synthetic is deterministic and prints the index") {
        TempDir dir("cli-gen");
        const auto a = cli(dir, "gen-synthetic --out a --seed 7 " + kSmall);
        const auto b = cli(dir, "gen-synthetic --out b --seed 7 " + kSmall);
        CHECK(a.code == 0);
        CHECK(b.code == 0);
        CHECK(fixture::tree(dir / "a") == fixture::tree(dir / "b"));
        CHECK(a.out.find("dot") != std::string::npos);
        CHECK(a.out.find("blotch") != std::string::npos);
        const auto idx = specshift::load_dataset(dir / "a", "synth");
        for (const auto& d : idx.defect_classes) {
            CHECK(a.out.find(d.name + "  ") != std::string::npos);
        }
    }

    TEST_CASE("usage errors exit 2") {
        TempDir dir("cli-usage");
        CHECK(cli(dir, "gen-synthetic --seed 7").code == 2);
        CHECK(cli(dir, "gen-synthetic --out x --bogus").code == 2);
        CHECK(cli(dir, "").code == 2);
        CHECK(cli(dir, "train --manifest missing.json --out m.bin").code == 2);
        CHECK(cli(dir, "--help").code == 0);
    }

    TEST_CASE("build-scenario dependency and target errors") {
        TempDir dir("cli-scenario");
        REQUIRE(cli(dir, "gen-synthetic --out d " + kSmall).code == 0);
        const auto n2a = cli(dir, "build-scenario --dataset d --class synth --scenario n2a --out n");
        CHECK(n2a.code == 1);
        CHECK(n2a.err.find("gen-pseudo") != std::string::npos);

        const auto none = cli(dir, "build-scenario --dataset d --class synth --scenario a2n --target auto --max-area 0.001 --out q");
        CHECK(none.code == 1);
        CHECK(none.err.find(">= 0.0010") != std::string::npos);
        CHECK(none.err.find("blotch") != std::string::npos);
        CHECK_FALSE(fs::exists(dir / "q"));

        // only the big class: its ~5% area is listed against the 1% rule
        TempDir big("cli-big");
        REQUIRE(cli(big, "gen-synthetic --out d --image-size 32 --n-train 4 --n-test 2 --defect blotch:blob:3:0.045:0.055").code == 0);
        const auto only_big = cli(big, "build-scenario --dataset d --class synth --scenario a2n --out q");
        CHECK(only_big.code == 1);
        CHECK(only_big.err.find("blotch: 0.0") != std::string::npos);
        CHECK(only_big.err.find(">= 0.0100") != std::string::npos);

        const auto multi = cli(dir, "build-scenario --dataset d --class synth --scenario a2n --max-area 0.5 --out m");
        CHECK(multi.code == 0);
        CHECK(fs::exists(dir / "m/dot/changed.json"));
        CHECK(fs::exists(dir / "m/blotch/standard.json"));

        const auto one = cli(dir, "build-scenario --dataset d --class synth --scenario a2n --target auto --out s");
        CHECK(one.code == 0);
        CHECK(fs::exists(dir / "s/changed.json"));
        CHECK(fs::exists(dir / "s/standard.json"));

        CHECK(cli(dir, "build-scenario --dataset d --class synth --scenario x2y --out z").code == 1);
        CHECK(cli(dir, "build-scenario --dataset d --class synth --scenario a2n --target nope --out z").code == 1);
    }

    TEST_CASE("train, eval, s-auroc, render") {
        TempDir dir("cli-pipeline");
        REQUIRE(cli(dir, "gen-synthetic --out d " + kSmall).code == 0);
        REQUIRE(cli(dir, "build-scenario --dataset d --class synth --scenario a2n --target dot --out s").code == 0);
        REQUIRE(cli(dir, "train --manifest s/changed.json --out post.bin " + kModel).code == 0);
        REQUIRE(cli(dir, "train --manifest s/standard.json --out pre.bin --repaste off " + kModel).code == 0);

        const auto ev = cli(dir, "eval --model post.bin --manifest s/changed.json --metrics pro,i_auroc --out ev.json");
        CHECK(ev.code == 0);
        const auto j = nlohmann::json::parse(fixture::slurp(dir / "ev.json"));
        std::set<std::string> keys;
        for (const auto& [k, v] : j.at("metrics").items()) keys.insert(k);
        CHECK(keys == std::set<std::string>{"pro", "i_auroc"});
        CHECK(cli(dir, "eval --model post.bin --manifest s/changed.json --metrics f1 --out bad.json").code == 1);

        const auto same = cli(dir, "s-auroc --pre post.bin --post post.bin --manifest-changed s/changed.json "
                                   "--manifest-standard s/standard.json --out same.json");
        CHECK(same.code == 0);
        CHECK(specshift::read_s_auroc_report(dir / "same.json").delta == 0.0);

        const auto cmp = cli(dir, "s-auroc --pre pre.bin --post post.bin --manifest-changed s/changed.json "
                                  "--manifest-standard s/standard.json --out s.json");
        CHECK(cmp.code == 0);
        const auto rep = specshift::read_s_auroc_report(dir / "s.json");
        CHECK(rep.n_target == 2);
        CHECK(rep.n_contrast == 3);
        CHECK(rep.target_class == "dot");
        CHECK(rep.delta == rep.post_change_auroc - rep.pre_change_auroc);

        const auto swapped = cli(dir, "s-auroc --pre pre.bin --post post.bin --manifest-changed s/standard.json "
                                      "--manifest-standard s/changed.json --out x.json");
        CHECK(swapped.code == 1);

        CHECK(cli(dir, "render --model post.bin --image d/synth/test/dot/000.png --out heat/dot.png").code == 0);
        const auto heat = specshift::read_image(dir / "heat/dot.png");
        CHECK(heat.width == 64);
        CHECK(heat.height == 32);
        CHECK(heat.channels == 3);
        CHECK(cli(dir, "render --model post.bin --manifest s/changed.json --out heat/all").code == 0);
        CHECK(fs::exists(dir / "heat/all/test_dot_003.png"));
        CHECK(cli(dir, "render --model post.bin --out heat/none.png").code == 1);
    }
}
