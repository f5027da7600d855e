#include "dualmem/cli/cli.hpp"

int main(int argc, char** argv) {
    return dualmem::cli::main_entry(argc, argv);
}
