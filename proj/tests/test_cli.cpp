#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

namespace {

namespace fs = std::filesystem;

struct RunResult {
    int exit_code = -1;
    std::string output;
};

const fs::path& work_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("fitmesh_cli_" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

RunResult run_cli(const std::string& args) {
    const fs::path log = work_dir() / "out.log";
    const std::string cmd =
        std::string(FITMESH_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    std::stringstream buffer;
    buffer << in.rdbuf();
    result.output = buffer.str();
    return result;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

int count_lines(const std::string& text) {
    int lines = 0;
    for (char c : text)
        if (c == '\n') ++lines;
    return lines;
}

int count_occurrences(const std::string& text, const std::string& needle) {
    int count = 0;
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

} // namespace

TEST_CASE("solve mode writes the grid dump with the right shape") {
    const fs::path out = work_dir() / "solve";
    const RunResult run = run_cli("--mode solve --problem builtin:example1 --N 128 --M 32 "
                                  "--eta 2^-11 --out " + out.string());
    CHECK(run.exit_code == 0);
    CHECK(count_occurrences(run.output, "artifact:") == 1);
    CHECK(run.output.find("summary mode=solve") != std::string::npos);

    const fs::path csv = out / "grid_N128_M32.csv";
    REQUIRE(fs::exists(csv));
    const std::string content = read_file(csv);
    CHECK(count_lines(content) == 1 + 33 * 129); // header + (M+1)(N+1) value rows
}

TEST_CASE("solve artifacts are byte-identical across runs") {
    const fs::path out_a = work_dir() / "det_a";
    const fs::path out_b = work_dir() / "det_b";
    CHECK(run_cli("--mode solve --problem builtin:example1 --N 32 --M 8 --eta 2^-9 --out " +
                  out_a.string()).exit_code == 0);
    CHECK(run_cli("--mode solve --problem builtin:example1 --N 32 --M 8 --eta 2^-9 --out " +
                  out_b.string()).exit_code == 0);
    const std::string a = read_file(out_a / "grid_N32_M8.csv");
    const std::string b = read_file(out_b / "grid_N32_M8.csv");
    CHECK(!a.empty());
    CHECK(a == b);
}

TEST_CASE("validate mode distinguishes pass and failure") {
    CHECK(run_cli("--mode validate --problem builtin:example1 --eta 2^-9").exit_code == 0);

    // config violating the epsilon condition: sqrt(0.09) > sqrt(2.9)/6
    const fs::path bad = work_dir() / "bad.conf";
    std::ofstream(bad) << "n = 2\nepsilons = 0.045, 0.09\nalpha = 2.9\nT = 1\n"
                          "A.1.1 = 4+3*t\nA.1.2 = -1\nA.2.1 = -1\nA.2.2 = 4+3*t\n"
                          "f.1 = 2+exp(3*t)\nf.2 = 2+exp(3*t)\n"
                          "phi_left.1 = 1+t^8\nphi_left.2 = 1+t^8\n"
                          "phi_right.1 = 1+t^8\nphi_right.2 = 1+t^8\n"
                          "phi_bottom.1 = 1\nphi_bottom.2 = 1\n";
    const RunResult run = run_cli("--mode validate --problem " + bad.string());
    CHECK(run.exit_code == 3);
    CHECK(run.output.find("epsilon_condition") != std::string::npos);
    CHECK(run.output.find("FAIL") != std::string::npos);
}

TEST_CASE("config errors use their own exit code") {
    CHECK(run_cli("--mode solve --problem builtin:example1 --eta 2^-9").exit_code == 2); // no N/M
    CHECK(run_cli("--mode nonsense --problem builtin:example1").exit_code == 2);
    CHECK(run_cli("--mode validate --problem /no/such/file.conf").exit_code == 2);
    CHECK(run_cli("--mode validate").exit_code == 2);                 // missing --problem
    CHECK(run_cli("--mode solve --problem builtin:example1 --N 100 --M 4 --eta 2^-9").exit_code ==
          2);                                                         // N not a multiple of 8
    CHECK(run_cli("--mode sweep-time --problem builtin:example1 --N 32 --eta 2^-9 "
                  "--resolutions 8,12").exit_code == 2);              // not doubling
}

TEST_CASE("solver and io failures use their own exit codes") {
    // an unreachable residual tolerance forces the solver-failure path
    CHECK(run_cli("--mode solve --problem builtin:example1 --eta 2^-9 --N 32 --M 4 "
                  "--tolerance 0 --out " + (work_dir() / "never").string()).exit_code == 4);
    // output directory nested under a regular file cannot be created
    CHECK(run_cli("--mode mesh-dump --N 32 --eta 2^-9 --out /dev/null/nested").exit_code == 5);
}

TEST_CASE("file-based problem solves like the builtin") {
    const fs::path conf = work_dir() / "example.conf";
    std::ofstream(conf) << "n = 2\nepsilons = 2^-15, 2^-14\nalpha = 2.9\nT = 1\n"
                           "A.1.1 = 4+3*t\nA.1.2 = -1\nA.2.1 = -1\nA.2.2 = 4+3*t\n"
                           "f.1 = 2+exp(3*t)\nf.2 = 2+exp(3*t)\n"
                           "phi_left.1 = 1+t^8\nphi_left.2 = 1+t^8\n"
                           "phi_right.1 = 1+t^8\nphi_right.2 = 1+t^8\n"
                           "phi_bottom.1 = 1\nphi_bottom.2 = 1\n";
    const fs::path out_file = work_dir() / "from_file";
    const fs::path out_builtin = work_dir() / "from_builtin";
    CHECK(run_cli("--mode solve --problem " + conf.string() + " --N 32 --M 8 --out " +
                  out_file.string()).exit_code == 0);
    CHECK(run_cli("--mode solve --problem builtin:example1 --eta 2^-11 --N 32 --M 8 --out " +
                  out_builtin.string()).exit_code == 0);
    CHECK(read_file(out_file / "grid_N32_M8.csv") == read_file(out_builtin / "grid_N32_M8.csv"));
}

TEST_CASE("sweep-time emits a table with the expected layout") {
    const fs::path out = work_dir() / "sweep";
    const RunResult run = run_cli("--mode sweep-time --problem builtin:example1 --N 32 "
                                  "--eta 2^-7,2^-8 --resolutions 8,16 --out " + out.string());
    CHECK(run.exit_code == 0);
    CHECK(run.output.find("p_star=") != std::string::npos);
    CHECK(count_occurrences(run.output, "artifact:") == 1);

    const std::string csv = read_file(out / "table_time_N32.csv");
    CHECK(csv.find("axis,time") == 0);
    CHECK(csv.find("fixed_N,32") != std::string::npos);
    CHECK(csv.find("2^-7,") != std::string::npos);
    CHECK(csv.find("\nD,") != std::string::npos);
    CHECK(csv.find("\np*,") != std::string::npos);
    CHECK(csv.find("\nC*,") != std::string::npos);
}

TEST_CASE("mesh-dump writes one row per point") {
    const fs::path out = work_dir() / "mesh";
    const RunResult run =
        run_cli("--mode mesh-dump --N 64 --eta 2^-9 --out " + out.string());
    CHECK(run.exit_code == 0);
    const std::string csv = read_file(out / "mesh_N64.csv");
    CHECK(count_lines(csv) == 66); // header + 65 points
    CHECK(csv.find("j,x,h,in_J") == 0);
}

TEST_CASE("three-component problems run through validate, solve, and sweeps") {
    const fs::path conf = work_dir() / "three.conf";
    std::ofstream(conf) << "n = 3\nepsilons = 2^-16, 2^-14, 2^-12\nalpha = 1.5\nT = 1\n"
                           "A.1.1 = 3+t\nA.1.2 = -0.5\nA.1.3 = -0.5\n"
                           "A.2.1 = -0.5\nA.2.2 = 3+t\nA.2.3 = -0.5\n"
                           "A.3.1 = -0.5\nA.3.2 = -0.5\nA.3.3 = 3+t\n"
                           "f.1 = 1+t\nf.2 = 1+x*(1-x)\nf.3 = 2\n"
                           "phi_left.1 = 1\nphi_left.2 = 1+t^2\nphi_left.3 = 1\n"
                           "phi_right.1 = 1\nphi_right.2 = 1\nphi_right.3 = 1+t\n"
                           "phi_bottom.1 = 1\nphi_bottom.2 = 1\nphi_bottom.3 = 1\n";
    const fs::path out = work_dir() / "n3";
    CHECK(run_cli("--mode validate --problem " + conf.string()).exit_code == 0);
    CHECK(run_cli("--mode solve --problem " + conf.string() + " --N 48 --M 8 --out " +
                  out.string()).exit_code == 0);
    const std::string grid = read_file(out / "grid_N48_M8.csv");
    CHECK(count_lines(grid) == 1 + 9 * 49);
    CHECK(grid.rfind("t,x,u1,u2,u3", 0) == 0);
    const RunResult sweep = run_cli("--mode sweep-space --problem " + conf.string() +
                                    " --eta 2^-6,2^-8 --M 8 --resolutions 24,48 --out " +
                                    out.string());
    CHECK(sweep.exit_code == 0);
    CHECK(fs::exists(out / "table_space_M8.csv"));
}

TEST_CASE("FITMESH_OUT provides the default output directory") {
    const fs::path out = work_dir() / "env_out";
    const fs::path log = work_dir() / "env.log";
    const std::string cmd = "FITMESH_OUT=" + out.string() + " " + FITMESH_CLI_PATH +
                            " --mode mesh-dump --N 32 --eta 2^-9 > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(fs::exists(out / "mesh_N32.csv"));
}

TEST_CASE("solver flags are accepted") {
    const fs::path out = work_dir() / "flags";
    CHECK(run_cli("--mode solve --problem builtin:example1 --eta 2^-9 --N 32 --M 4 "
                  "--dense-fallback --tolerance 1e-9 --out " + out.string()).exit_code == 0);
}

TEST_CASE("diagnostics reports layer checks") {
    const fs::path out = work_dir() / "diag";
    const RunResult run = run_cli("--mode diagnostics --N 64 --eta 2^-9 --out " + out.string());
    CHECK(run.exit_code == 0);
    const std::string csv = read_file(out / "diagnostics_N64.csv");
    CHECK(csv.find("layer_transition") != std::string::npos);
    CHECK(csv.find("interesting_point") != std::string::npos);
    CHECK(run.output.find("max_rel_error=") != std::string::npos);
}
