#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "context.hpp"

namespace kummer::cli {

// Registers every subcommand on the app; run() executes the one that was parsed and returns the exit code.
class Commands {
public:
    explicit Commands(CLI::App& app);
    int run();

private:
    struct Entry {
        CLI::App* app;
        std::function<int()> body;
    };
    void add(CLI::App* sub, std::function<int()> body) { entries_.push_back({sub, std::move(body)}); }

    void add_shape(CLI::App& app);
    void add_classical_trajectory(CLI::App& app);
    void add_quadrature(CLI::App& app);
    void add_spectrum(CLI::App& app);
    void add_evolve(CLI::App& app);
    void add_verify_relations(CLI::App& app);
    void add_kernel_check(CLI::App& app);
    void add_density(CLI::App& app);
    void add_limit_bracket(CLI::App& app);
    void add_preset(CLI::App& app);
    void add_verify_all(CLI::App& app);

    std::vector<Entry> entries_;
    // Option storage must outlive parsing; each subcommand owns one slot.
    std::vector<std::shared_ptr<void>> storage_;
    template <class T>
    T& slot() {
        auto p = std::make_shared<T>();
        storage_.push_back(p);
        return *p;
    }
};

// verify-all rows for one preset (implemented in verify_all.cpp).
struct CheckRow {
    std::string module;
    std::string name;
    double deviation = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};
std::vector<CheckRow> verify_all_rows(const Preset& preset, std::uint64_t seed);

} // namespace kummer::cli
