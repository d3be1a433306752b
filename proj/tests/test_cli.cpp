// The command-line front end, run as a child process: exit codes, diagnostics, data formats and
// determinism. Numbers in its output are compared with closed forms.
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include <doctest.h>
#include <nlohmann/json.hpp>

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Run {
    int exit = -1;
    std::string out, err;
};

std::string temp_path(const char* tag) {
    return std::string("/tmp/kummer_cli_test_") + tag + "_" + std::to_string(::getpid());
}

Run run(const std::string& args, const std::string& env = "") {
    const std::string err_path = temp_path("stderr");
    const std::string cmd = env + " " + KUMMER_CLI_PATH + " " + args + " 2>" + err_path;
    Run r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int status = ::pclose(pipe);
    r.exit = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(err_path);
    std::stringstream ss;
    ss << in.rdbuf();
    r.err = ss.str();
    std::remove(err_path.c_str());
    return r;
}

std::vector<std::vector<double>> csv_rows(const std::string& text, std::string* header = nullptr) {
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    if (header) *header = line;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

std::string diag_code(const Run& r) { return nlohmann::json::parse(r.err).at("code").get<std::string>(); }

}  // namespace

TEST_CASE("usage errors exit 1 with a one-line JSON diagnostic") {
    const Run none = run("");
    CHECK(none.exit == 1);
    CHECK(diag_code(none) == "cli.usage");
    const Run flag = run("spectrum --no-such-flag");
    CHECK(flag.exit == 1);
    CHECK(diag_code(flag) == "cli.usage");
    const Run p = run("spectrum --preset krawtchouk --p 1.5");
    CHECK(p.exit == 1);
    CHECK(diag_code(p) == "preset.p");
    const nlohmann::json d = nlohmann::json::parse(p.err);
    CHECK(d.at("exit") == 1);
    CHECK(std::count(p.err.begin(), p.err.end(), '\n') == 1);
}

TEST_CASE("spectrum of the Krawtchouk preset is hbar {0..L}") {
    const Run r = run("spectrum --preset krawtchouk --hbar 0.5 --format json");
    REQUIRE(r.exit == 0);
    const auto doc = nlohmann::json::parse(r.out);
    REQUIRE(doc.at("dim") == 11);
    for (int j = 0; j <= 10; ++j) CHECK(std::fabs(doc.at("eigenvalues")[j].get<double>() - 0.5 * j) < 1e-12);
    const Run csv = run("spectrum --preset krawtchouk --format csv");
    std::string header;
    const auto rows = csv_rows(csv.out, &header);
    CHECK(header == "index,eigenvalue");
    CHECK(rows.size() == 11);
}

TEST_CASE("shape samples satisfy the Casimir equation") {
    const Run r = run("shape --preset krawtchouk --p 0.5 --c1 1 --grid 16x16");
    REQUIRE(r.exit == 0);
    std::string header;
    const auto rows = csv_rows(r.out, &header);
    CHECK(header == "i0,psi0,x,y,casimir");
    REQUIRE(rows.size() == 256);
    for (const auto& row : rows) {
        // Krawtchouk at p = 1/2: x^2 + y^2 = (c1^2 - I0^2)/4.
        CHECK(std::fabs(row[2] * row[2] + row[3] * row[3] - 0.25 * (1.0 - row[0] * row[0])) < 1e-14);
        CHECK(std::fabs(row[4]) < 1e-14);
    }
}

TEST_CASE("density output matches the rational closed form") {
    const Run r = run("density --preset krawtchouk --grid 0.1:2:5");
    REQUIRE(r.exit == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 5);
    const double pq = 0.25;
    for (const auto& row : rows) {
        const double expect = std::tgamma(12.0) / (2.0 * kPi * pq * std::pow(1.0 + row[0] / pq, 12));
        CHECK(std::fabs(row[1] / expect - 1.0) < 1e-8);
    }
}

TEST_CASE("preset documents round-trip through --config") {
    const std::string path = temp_path("config") + ".json";
    const Run doc = run("preset krawtchouk --p 0.3");
    REQUIRE(doc.exit == 0);
    std::ofstream(path) << doc.out;
    const Run a = run("spectrum --config " + path);
    const Run b = run("spectrum --preset krawtchouk --p 0.3");
    CHECK(a.exit == 0);
    CHECK(a.out == b.out);
    const Run clash = run("spectrum --preset laguerre --config " + path);
    CHECK(clash.exit == 1);
    CHECK(diag_code(clash) == "cli.conflict");
    std::ofstream(path) << "{ not json";
    const Run broken = run("spectrum --config " + path);
    CHECK(broken.exit == 1);
    std::remove(path.c_str());
}

TEST_CASE("environment truncation and deterministic output") {
    const Run r = run("spectrum --preset laguerre --format json", "KUMMER_TRUNCATION=12");
    REQUIRE(r.exit == 0);
    CHECK(nlohmann::json::parse(r.out).at("dim") == 12);
    const Run a = run("verify-all --preset krawtchouk --format csv --seed 3");
    const Run b = run("verify-all --preset krawtchouk --format csv --seed 3");
    CHECK(a.exit == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("verify-all passes and help documents CSV columns") {
    const Run r = run("verify-all --preset q-weyl --format json");
    CHECK(r.exit == 0);
    CHECK(nlohmann::json::parse(r.out).at("pass") == true);
    const Run h = run("density --help");
    CHECK(h.exit == 0);
    CHECK(h.out.find("CSV columns: t,rho") != std::string::npos);
}
