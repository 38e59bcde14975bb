// Exit 0 when two grid CSV files hold identical shapes, kinds and values.
#include <cstdio>

#include "gol/longtail_data.hpp"

int main(int argc, char** argv) {
    if (argc != 3) {
        std::fprintf(stderr, "usage: grid_compare a.csv b.csv\n");
        return 2;
    }
    const auto a = gol::load_grid_csv(argv[1]);
    const auto b = gol::load_grid_csv(argv[2]);
    const bool same = a.grid_h == b.grid_h && a.grid_w == b.grid_w && a.kind == b.kind &&
                      a.cells == b.cells;
    return same ? 0 : 1;
}
