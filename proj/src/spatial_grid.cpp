#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "gol/error.hpp"
#include "gol/longtail_data.hpp"

namespace gol {

std::string to_string(GridKind kind) {
    switch (kind) {
        case GridKind::occurrence: return "occurrence";
        case GridKind::membership: return "membership";
        case GridKind::joint: return "joint";
    }
    return "unknown";
}

GridKind grid_kind_from_string(std::string_view name) {
    if (name == "occurrence") return GridKind::occurrence;
    if (name == "membership") return GridKind::membership;
    if (name == "joint") return GridKind::joint;
    throw ParseError("unknown grid kind \"" + std::string(name) + "\"");
}

double SpatialGrid::sum() const {
    const auto v = cells.flat();
    return std::accumulate(v.begin(), v.end(), 0.0);
}

std::size_t cell_index(double normalized, std::size_t cells) {
    const auto idx = static_cast<std::size_t>(std::floor(normalized * static_cast<double>(cells)));
    return idx >= cells ? cells - 1 : idx;
}

namespace {

void check_dims(std::size_t grid_h, std::size_t grid_w) {
    if (grid_h == 0 || grid_w == 0) {
        throw Error("grid dimensions must be at least 1");
    }
}

// Flat cell of an object, plus its category position.
struct Placement {
    std::size_t cls;
    std::size_t cell;
};

std::unordered_map<long, std::size_t> index_by_id(const AnnotationTable& table) {
    std::unordered_map<long, std::size_t> out;
    for (std::size_t i = 0; i < table.images.size(); ++i) out.emplace(table.images[i].id, i);
    return out;
}

std::unordered_map<long, std::size_t> category_pos(const AnnotationTable& table) {
    std::unordered_map<long, std::size_t> out;
    for (std::size_t i = 0; i < table.categories.size(); ++i) {
        out.emplace(table.categories[i].id, i);
    }
    return out;
}

Placement place(const ObjectInfo& obj, const ImageInfo& img, std::size_t cls, std::size_t grid_h,
                std::size_t grid_w) {
    const std::size_t i = cell_index(obj.cy / img.height, grid_h);
    const std::size_t j = cell_index(obj.cx / img.width, grid_w);
    return {cls, i * grid_w + j};
}

CellCounts empty_counts(const AnnotationTable& table, std::size_t grid_h, std::size_t grid_w) {
    check_dims(grid_h, grid_w);
    CellCounts counts;
    counts.grid_h = grid_h;
    counts.grid_w = grid_w;
    counts.class_count = table.categories.size();
    counts.total_objects = static_cast<long>(table.objects.size());
    counts.all.assign(grid_h * grid_w, 0);
    counts.per_class.assign(counts.class_count * grid_h * grid_w, 0);
    return counts;
}

SpatialGrid blank_grid(std::size_t grid_h, std::size_t grid_w, GridKind kind) {
    return {grid_h, grid_w, kind, Matrix(grid_h, grid_w, 0.0), {}};
}

void require_objects(const CellCounts& counts) {
    if (counts.total_objects == 0) {
        throw Error("no objects");
    }
}

void check_class(const CellCounts& counts, std::size_t cls) {
    if (cls >= counts.class_count) {
        throw Error("class index " + std::to_string(cls) + " out of range");
    }
}

}  // namespace

CellCounts cell_counts(const AnnotationTable& table, std::size_t grid_h, std::size_t grid_w) {
    CellCounts counts = empty_counts(table, grid_h, grid_w);
    const auto images = index_by_id(table);
    const auto cats = category_pos(table);
    const std::size_t cells = grid_h * grid_w;
    const auto n = static_cast<long>(table.objects.size());

    std::vector<Placement> placed(table.objects.size());
    for (long k = 0; k < n; ++k) {
        const auto& obj = table.objects[static_cast<std::size_t>(k)];
        if (!images.contains(obj.image_id)) throw Error("unknown image_id " + std::to_string(obj.image_id));
        if (!cats.contains(obj.category_id)) throw Error("unknown category_id " + std::to_string(obj.category_id));
    }
#pragma omp parallel for schedule(static)
    for (long k = 0; k < n; ++k) {
        const auto& obj = table.objects[static_cast<std::size_t>(k)];
        placed[static_cast<std::size_t>(k)] =
            place(obj, table.images[images.at(obj.image_id)], cats.at(obj.category_id), grid_h, grid_w);
    }
    // Integer counts: the result is independent of the interleaving.
#pragma omp parallel for schedule(static)
    for (long k = 0; k < n; ++k) {
        const Placement p = placed[static_cast<std::size_t>(k)];
#pragma omp atomic
        ++counts.all[p.cell];
#pragma omp atomic
        ++counts.per_class[p.cls * cells + p.cell];
    }
    return counts;
}

SpatialGrid occurrence_grid(const CellCounts& counts) {
    require_objects(counts);
    SpatialGrid grid = blank_grid(counts.grid_h, counts.grid_w, GridKind::occurrence);
    const auto m = static_cast<double>(counts.total_objects);
    auto out = grid.cells.flat();
    for (std::size_t u = 0; u < out.size(); ++u) out[u] = static_cast<double>(counts.all[u]) / m;
    return grid;
}

SpatialGrid membership_grid(const CellCounts& counts, std::size_t cls) {
    check_class(counts, cls);
    SpatialGrid grid = blank_grid(counts.grid_h, counts.grid_w, GridKind::membership);
    const std::size_t cells = counts.grid_h * counts.grid_w;
    grid.empty_mask.assign(cells, 0);
    auto out = grid.cells.flat();
    for (std::size_t u = 0; u < cells; ++u) {
        if (counts.all[u] == 0) {
            grid.empty_mask[u] = 1;
            continue;
        }
        out[u] = static_cast<double>(counts.per_class[cls * cells + u]) /
                 static_cast<double>(counts.all[u]);
    }
    return grid;
}

SpatialGrid joint_grid(const CellCounts& counts, std::size_t cls) {
    check_class(counts, cls);
    require_objects(counts);
    SpatialGrid grid = blank_grid(counts.grid_h, counts.grid_w, GridKind::joint);
    const std::size_t cells = counts.grid_h * counts.grid_w;
    const auto m = static_cast<double>(counts.total_objects);
    auto out = grid.cells.flat();
    // Same value as membership * occurrence, without the intermediate rounding.
    for (std::size_t u = 0; u < cells; ++u) {
        out[u] = static_cast<double>(counts.per_class[cls * cells + u]) / m;
    }
    return grid;
}

SpatialGrid occurrence_grid(const AnnotationTable& table, std::size_t grid_h, std::size_t grid_w) {
    return occurrence_grid(cell_counts(table, grid_h, grid_w));
}

SpatialGrid membership_grid(const AnnotationTable& table, long category_id, std::size_t grid_h,
                            std::size_t grid_w) {
    const std::size_t cls = table.category_index(category_id);
    return membership_grid(cell_counts(table, grid_h, grid_w), cls);
}

SpatialGrid joint_grid(const AnnotationTable& table, long category_id, std::size_t grid_h,
                       std::size_t grid_w) {
    const std::size_t cls = table.category_index(category_id);
    return joint_grid(cell_counts(table, grid_h, grid_w), cls);
}

std::vector<SpatialGrid> joint_grids(const AnnotationTable& table, std::size_t grid_h,
                                     std::size_t grid_w) {
    const CellCounts counts = cell_counts(table, grid_h, grid_w);
    require_objects(counts);
    std::vector<SpatialGrid> out(counts.class_count);
    const auto classes = static_cast<long>(counts.class_count);
#pragma omp parallel for schedule(dynamic)
    for (long c = 0; c < classes; ++c) {
        out[static_cast<std::size_t>(c)] = joint_grid(counts, static_cast<std::size_t>(c));
    }
    return out;
}

namespace reference {

CellCounts cell_counts(const AnnotationTable& table, std::size_t grid_h, std::size_t grid_w) {
    CellCounts counts = empty_counts(table, grid_h, grid_w);
    const std::size_t cells = grid_h * grid_w;
    for (const auto& obj : table.objects) {
        const Placement p =
            place(obj, table.image(obj.image_id), table.category_index(obj.category_id), grid_h, grid_w);
        ++counts.all[p.cell];
        ++counts.per_class[p.cls * cells + p.cell];
    }
    return counts;
}

SpatialGrid occurrence_grid(const AnnotationTable& table, std::size_t grid_h, std::size_t grid_w) {
    return gol::occurrence_grid(reference::cell_counts(table, grid_h, grid_w));
}

SpatialGrid membership_grid(const AnnotationTable& table, long category_id, std::size_t grid_h,
                            std::size_t grid_w) {
    const std::size_t cls = table.category_index(category_id);
    return gol::membership_grid(reference::cell_counts(table, grid_h, grid_w), cls);
}

SpatialGrid joint_grid(const AnnotationTable& table, long category_id, std::size_t grid_h,
                       std::size_t grid_w) {
    const std::size_t cls = table.category_index(category_id);
    return gol::joint_grid(reference::cell_counts(table, grid_h, grid_w), cls);
}

}  // namespace reference

std::string grid_to_csv(const SpatialGrid& grid) {
    std::string out = "grid_h,grid_w,kind\n";
    out += std::to_string(grid.grid_h) + "," + std::to_string(grid.grid_w) + "," +
           to_string(grid.kind) + "\n";
    char buf[32];
    for (std::size_t i = 0; i < grid.grid_h; ++i) {
        for (std::size_t j = 0; j < grid.grid_w; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", grid.cells(i, j));
            if (j > 0) out += ',';
            out += buf;
        }
        out += '\n';
    }
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_double(const std::string& s, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(where + ": not a number: \"" + s + "\"");
    }
}

std::size_t parse_dim(const std::string& s, const std::string& where) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v == 0) {
        throw ParseError(where + ": expected a positive integer, got \"" + s + "\"");
    }
    return v;
}

}  // namespace

SpatialGrid grid_from_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != "grid_h,grid_w,kind") {
        throw ParseError("line 1: expected header \"grid_h,grid_w,kind\"");
    }
    if (!std::getline(in, line)) {
        throw ParseError("line 2: missing grid metadata");
    }
    const auto meta = split_csv_line(line);
    if (meta.size() != 3) {
        throw ParseError("line 2: expected grid_h,grid_w,kind values");
    }
    SpatialGrid grid;
    grid.grid_h = parse_dim(meta[0], "line 2");
    grid.grid_w = parse_dim(meta[1], "line 2");
    grid.kind = grid_kind_from_string(meta[2]);
    grid.cells = Matrix(grid.grid_h, grid.grid_w);
    for (std::size_t i = 0; i < grid.grid_h; ++i) {
        const std::string where = "line " + std::to_string(i + 3);
        if (!std::getline(in, line)) {
            throw ParseError(where + ": missing grid row");
        }
        const auto fields = split_csv_line(line);
        if (fields.size() != grid.grid_w) {
            throw ParseError(where + ": expected " + std::to_string(grid.grid_w) + " values, got " +
                             std::to_string(fields.size()));
        }
        for (std::size_t j = 0; j < grid.grid_w; ++j) {
            grid.cells(i, j) = parse_double(fields[j], where);
        }
    }
    return grid;
}

SpatialGrid load_grid_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path + ": cannot open file");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return grid_from_csv(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

}  // namespace gol
