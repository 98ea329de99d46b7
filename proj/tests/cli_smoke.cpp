// End-to-end checks of the levy-she binary: experiment outputs, determinism,
// and exit codes. Invoked by ctest with the binary path as argv[1].

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
    std::printf("%s %s\n", ok ? "[ok]" : "[FAIL]", what.c_str());
    if (!ok) ++failures;
}

int run(const std::string& cmd) {
    int status = std::system((cmd + " > /dev/null 2>&1").c_str());
    if (status == -1) return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: cli_smoke <levy-she path>\n");
        return 2;
    }
    std::string bin = argv[1];
    fs::path work = fs::temp_directory_path() / "levyshe_cli_smoke";
    fs::remove_all(work);
    fs::create_directories(work);

    const std::string base_cfg = R"([measure]
family = "pointmass"
z0 = 1.0
mass = 1.0

[model]
d = 1
kappa = 0.15915494309189535
t = 1.0

[experiment]
levels_min = 1.5
levels_max = 50.0
levels_per_decade = 6
seed = 42
replicates = 2000
estimand = "ybar"
region_lo = [0.0]
region_hi = [1.0]
grid_n = 9
rate_a = 0.5
rate_b = 1.0
n_max = 500
runs = 3

[output]
format = "csv"
)";

    write(work / "exp.toml", base_cfg);

    // tails: four curve files, fixed header, byte-identical reruns
    check(run(bin + " tails " + (work / "exp.toml").string() + " --out " + (work / "t1").string()) == 0,
          "tails exit 0");
    check(run(bin + " tails " + (work / "exp.toml").string() + " --out " + (work / "t2").string()) == 0,
          "tails rerun exit 0");
    int curve_files = 0;
    for (const char* stem : {"tails_eta.csv", "tails_tau.csv", "tails_eta0.csv", "tails_etaA.csv"}) {
        fs::path p1 = work / "t1" / stem;
        if (!fs::exists(p1)) {
            check(false, std::string("missing ") + stem);
            continue;
        }
        ++curve_files;
        std::string body = slurp(p1);
        check(body.rfind("# schema=1\n", 0) == 0, std::string(stem) + " schema line");
        check(body.find("r,value,kind,ci_halfwidth\n") != std::string::npos,
              std::string(stem) + " header");
        check(body == slurp(work / "t2" / stem), std::string(stem) + " byte-identical rerun");
    }
    check(curve_files == 4, "tails emits 4 curve files");

    // a different seed changes the fingerprint line but parses the same config
    check(run(bin + " tails " + (work / "exp.toml").string() + " --seed 7 --out " +
              (work / "t3").string()) == 0,
          "tails with --seed");
    check(slurp(work / "t3" / "tails_eta.csv") != slurp(work / "t1" / "tails_eta.csv"),
          "seed override changes the fingerprint");

    // mc-tail and simulate; replicate-level streaming on
    std::string mc_cfg = base_cfg;
    mc_cfg += "write_replicates = true\n";
    // keys appended to [output] must live in [experiment]; rebuild properly
    mc_cfg = base_cfg;
    mc_cfg.replace(mc_cfg.find("replicates = 2000"), 17,
                   "replicates = 2000\nwrite_replicates = true");
    write(work / "mc.toml", mc_cfg);
    check(run(bin + " mc-tail " + (work / "mc.toml").string() + " --out " + (work / "mc").string()) == 0,
          "mc-tail exit 0");
    check(fs::exists(work / "mc" / "mc_tail.csv"), "mc_tail.csv written");
    {
        std::string vals = slurp(work / "mc" / "values.csv");
        check(vals.find("replicate,estimand,value\n") != std::string::npos,
              "values.csv streams replicate rows");
        check(vals.find("0,ybar,") != std::string::npos, "values.csv first replicate present");
    }
    check(run(bin + " simulate " + (work / "exp.toml").string() + " --out " + (work / "sim").string()) == 0,
          "simulate exit 0");
    check(fs::exists(work / "sim" / "field.csv"), "field.csv written");

    // growth-test and peaks
    check(run(bin + " growth-test " + (work / "exp.toml").string() + " --out " + (work / "g").string()) == 0,
          "growth-test exit 0");
    check(fs::exists(work / "g" / "growth.json"), "growth.json written");
    check(run(bin + " peaks " + (work / "exp.toml").string() + " --out " + (work / "p").string()) == 0,
          "peaks exit 0");
    check(fs::exists(work / "p" / "peaks.json") && fs::exists(work / "p" / "peak_counts.csv"),
          "peaks outputs written");

    // config violating the existence condition: exit 2, message names it
    std::string bad_cfg = base_cfg;
    bad_cfg.replace(bad_cfg.find("family = \"pointmass\""), 20, "family = \"logtail\"\nbeta = 0.4");
    write(work / "bad.toml", bad_cfg);
    check(run(bin + " tails " + (work / "bad.toml").string() + " --out " + (work / "bad").string()) == 2,
          "invalid config exits 2");

    // unparsable config and missing file
    write(work / "broken.toml", "family pointmass");
    check(run(bin + " tails " + (work / "broken.toml").string()) == 2, "parse failure exits 2");
    check(run(bin + " tails " + (work / "nonexistent.toml").string()) == 2, "missing file exits 2");
    check(run(bin + " bogus-subcommand x") != 0, "unknown subcommand rejected");

    if (failures == 0) fs::remove_all(work);
    std::printf("%d failure(s)\n", failures);
    return failures == 0 ? 0 : 1;
}
