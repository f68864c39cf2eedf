#include "susplab/cli.hpp"

int main(int argc, char** argv) {
    return susplab::cli::run(argc, argv);
}
