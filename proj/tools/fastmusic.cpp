#include "fastmusic/bench.hpp"

int main(int argc, char** argv) {
    return fastmusic::cli_main(argc, argv);
}
