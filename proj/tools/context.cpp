#include "context.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include "kummer/errors.hpp"

namespace kummer::cli {

void add_system_options(CLI::App* app, SystemOptions& opts) {
    app->add_option("--preset", opts.preset, "Preset system: laguerre, krawtchouk, q-weyl, three-wave");
    app->add_option("--config", opts.config, "JSON configuration file, or - for standard input");
    app->add_option("--hbar", opts.hbar, "Planck constant (overrides the configuration)");
    app->add_option("--p", opts.p, "Krawtchouk parameter p in (0, 1)");
    app->add_option("--q", opts.q, "q-weyl deformation q in (0, 1)");
    app->add_option("--alpha", opts.alpha, "q-weyl scale alpha > 0");
    app->add_option("--frequencies", opts.frequencies, "three-wave frequencies w0 w1 w2")->expected(3);
    app->add_option("--vacuum", opts.vacuum, "Vacuum occupations v0 .. vN")->expected(1, 64);
    app->add_option("--truncation", opts.truncation,
                    "Truncation M of infinite sectors (default: KUMMER_TRUNCATION or 256)")
        ->check(CLI::PositiveNumber);
    app->add_option("--c1", opts.c1, "Classical momentum c1 (one-invariant systems)");
    app->add_option("--momentum", opts.momentum, "Classical momenta c1 .. cN")->expected(1, 64);
}

void add_output_options(CLI::App* app, OutputOptions& opts, const std::string& default_format) {
    app->add_option("--format", opts.format, "Output format (default " + default_format + ")");
    app->add_option("-o,--output", opts.path, "Output file (default: standard output)");
    app->add_option("--seed", opts.seed, "Seed of the random generator (default 1)");
}

namespace {

nlohmann::json read_document(const std::string& source) {
    std::string text;
    if (source == "-") {
        text.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
    } else {
        std::ifstream in(source);
        if (!in) throw ValidationError("config.missing", "cannot open configuration '" + source + "'");
        text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("config.json", std::string("malformed JSON configuration: ") + e.what());
    }
}

template <class T>
std::optional<T> field(const nlohmann::json& doc, const char* key) {
    if (!doc.is_object() || !doc.contains(key) || doc[key].is_null()) return std::nullopt;
    try {
        return doc[key].get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError("config.json", std::string("field \"") + key + "\" has the wrong type");
    }
}

void read_preset_params(const nlohmann::json& doc, PresetParams& params) {
    if (auto v = field<double>(doc, "hbar")) params.hbar = *v;
    if (auto v = field<double>(doc, "p")) params.p = *v;
    if (auto v = field<double>(doc, "q")) params.q = *v;
    if (auto v = field<double>(doc, "alpha")) params.alpha = *v;
    if (auto v = field<std::vector<double>>(doc, "frequencies")) params.frequencies = *v;
}

SystemSpec with_hbar(const SystemSpec& spec, double hbar) {
    return make_spec(spec.l, spec.resonance.rho, spec.g0.expr, spec.h0, hbar);
}

} // namespace

Context resolve(const SystemOptions& sys, const OutputOptions& out, const std::string& default_format) {
    Context ctx;
    std::optional<SystemSpec> bare;
    std::string preset = sys.preset;
    nlohmann::json output_doc;
    std::optional<std::uint64_t> config_seed;

    if (!sys.config.empty()) {
        if (!sys.preset.empty())
            throw ValidationError("cli.conflict", "--preset and --config select the system twice");
        const nlohmann::json doc = read_document(sys.config);
        if (!doc.is_object()) throw ValidationError("config.json", "configuration must be a JSON object");
        const nlohmann::json system = doc.contains("system") ? doc["system"] : doc;
        if (system.is_object() && system.contains("preset") && !system.contains("l")) {
            preset = system["preset"].get<std::string>();
            read_preset_params(system, ctx.params);
        } else {
            bare = spec_from_json(system);
        }
        if (auto v = field<std::vector<int>>(doc, "vacuum")) ctx.vacuum = *v;
        if (doc.contains("sector")) {
            const auto& sector = doc["sector"];
            if (auto v = field<std::vector<int>>(sector, "vacuum")) ctx.vacuum = *v;
            if (auto v = field<int>(sector, "truncation")) ctx.truncation = *v;
        }
        config_seed = field<std::uint64_t>(doc, "seed");
        if (doc.contains("output")) output_doc = doc["output"];
    }

    if (sys.hbar) ctx.params.hbar = *sys.hbar;
    if (sys.p) ctx.params.p = *sys.p;
    if (sys.q) ctx.params.q = *sys.q;
    if (sys.alpha) ctx.params.alpha = *sys.alpha;
    if (!sys.frequencies.empty()) ctx.params.frequencies = sys.frequencies;
    if (!sys.vacuum.empty()) ctx.vacuum = sys.vacuum;
    if (sys.truncation > 0) ctx.truncation = sys.truncation;
    if (ctx.truncation <= 0) ctx.truncation = default_truncation();

    if (bare) {
        ctx.spec = sys.hbar ? with_hbar(*bare, *sys.hbar) : *bare;
    } else if (!preset.empty()) {
        ctx.kind = parse_preset(preset);
        ctx.spec = preset_spec(*ctx.kind, ctx.params);
        if (ctx.vacuum.empty()) ctx.vacuum = canonical_vacuum(*ctx.kind);
    } else {
        throw ValidationError("cli.system", "no system given: use --preset or --config");
    }
    ctx.params.vacuum = ctx.vacuum;
    ctx.params.truncation = ctx.truncation;

    if (sys.c1 && !sys.momentum.empty()) throw ValidationError("cli.conflict", "--c1 and --momentum both given");
    if (sys.c1) ctx.momentum = {*sys.c1};
    if (!sys.momentum.empty()) ctx.momentum = sys.momentum;
    if (!ctx.momentum.empty() && static_cast<int>(ctx.momentum.size()) != ctx.spec.n_invariants())
        throw ValidationError("cli.momentum", "the system has " + std::to_string(ctx.spec.n_invariants()) +
                                                  " momenta, " + std::to_string(ctx.momentum.size()) + " given");

    ctx.seed = out.seed ? *out.seed : config_seed.value_or(1);
    ctx.format = out.format;
    if (ctx.format.empty()) ctx.format = field<std::string>(output_doc, "format").value_or(default_format);
    ctx.path = out.path.empty() ? field<std::string>(output_doc, "path").value_or("") : out.path;
    return ctx;
}

Sector Context::sector() const { return sector(truncation); }

Sector Context::sector(int m) const {
    if (vacuum.empty()) throw ValidationError("cli.vacuum", "no vacuum given: use --vacuum or a sector in the config");
    return build_sector(spec, vacuum, m);
}

std::vector<double> Context::classical_momentum() const {
    if (!momentum.empty()) return momentum;
    if (spec.n_invariants() == 0) return {};
    if (vacuum.empty()) throw ValidationError("cli.momentum", "no momentum given: use --c1, --momentum or --vacuum");
    return sector().momentum();
}

void emit(const Context& ctx, const std::string& text) {
    if (ctx.path.empty() || ctx.path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream f(ctx.path, std::ios::binary);
    if (!f) throw ValidationError("output.path", "cannot write '" + ctx.path + "'");
    f << text;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void diagnostic(const std::string& code, const std::string& message, int exit_code, const nlohmann::json& extra) {
    nlohmann::json d = extra;
    d["code"] = code;
    d["message"] = message;
    d["exit"] = exit_code;
    std::cerr << d.dump() << '\n';
}

} // namespace kummer::cli
