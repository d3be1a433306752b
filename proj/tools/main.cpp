#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "kummer/errors.hpp"

int main(int argc, char** argv) {
    using namespace kummer::cli;
    CLI::App app{"Classical and quantum Kummer shape algebras of resonantly coupled oscillators"};
    app.require_subcommand(1);
    app.footer("Exit codes: 0 success, 1 invalid input, 2 numerical failure or failed check. Errors print one JSON "
               "line {code, message, exit} on standard error. KUMMER_TRUNCATION sets the default truncation.");
    Commands commands(app);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        diagnostic("cli.usage", e.what(), kValidation);
        return kValidation;
    }
    try {
        return commands.run();
    } catch (const kummer::ValidationError& e) {
        diagnostic(e.code(), e.what(), kValidation);
        return kValidation;
    } catch (const kummer::NumericalError& e) {
        diagnostic(e.code(), e.what(), kNumerical, {{"estimate", e.estimate()}});
        return kNumerical;
    } catch (const std::exception& e) {
        diagnostic("internal", e.what(), kNumerical);
        return kNumerical;
    }
}
