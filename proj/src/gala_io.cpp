#include "gala/gala_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

namespace gala {

namespace {

// ---- little-endian buffer primitives ----

struct Writer {
    std::vector<std::uint8_t> bytes;

    void u8(std::uint8_t v) { bytes.push_back(v); }
    void u16(std::uint16_t v) {
        bytes.push_back(v & 0xff);
        bytes.push_back((v >> 8) & 0xff);
    }
    void u32(std::uint32_t v) {
        for (int k = 0; k < 4; ++k) bytes.push_back((v >> (8 * k)) & 0xff);
    }
    void u64(std::uint64_t v) {
        for (int k = 0; k < 8; ++k) bytes.push_back((v >> (8 * k)) & 0xff);
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void tag(const char* t) { bytes.insert(bytes.end(), t, t + 4); }
};

struct Reader {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos = 0;

    void require(std::size_t n) const {
        if (pos + n > size) throw IoError("truncated file");
    }
    std::uint8_t u8() {
        require(1);
        return data[pos++];
    }
    std::uint16_t u16() {
        require(2);
        std::uint16_t v = data[pos] | (std::uint16_t(data[pos + 1]) << 8);
        pos += 2;
        return v;
    }
    std::uint32_t u32() {
        require(4);
        std::uint32_t v = 0;
        for (int k = 0; k < 4; ++k) v |= std::uint32_t(data[pos + k]) << (8 * k);
        pos += 4;
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    bool tag(const char* t) {
        require(4);
        const bool ok = std::memcmp(data + pos, t, 4) == 0;
        pos += 4;
        return ok;
    }
};

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path);
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw IoError("cannot open " + path);
    const std::streamsize size = in.tellg();
    in.seekg(0);
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
    in.read(reinterpret_cast<char*>(bytes.data()), size);
    if (!in) throw IoError("read failed: " + path);
    return bytes;
}

DomainStats accumulate(const std::vector<double>& values) {
    DomainStats stats;
    if (values.empty()) return stats;
    stats.lo = *std::min_element(values.begin(), values.end());
    stats.hi = *std::max_element(values.begin(), values.end());
    return stats;
}

double normalize01(double v, const DomainStats& stats) {
    const double range = stats.hi - stats.lo;
    if (range <= 0.0) return 0.0;
    return std::clamp((v - stats.lo) / range, 0.0, 1.0);
}

} // namespace

GalaStats compute_stats(const GalaRep& rep) {
    GalaStats stats;
    std::vector<double> buf;

    buf.reserve(rep.forest.roots.size() * 3);
    for (const RootVoxel& root : rep.forest.roots)
        for (int k = 0; k < 3; ++k) buf.push_back(root.center[k]);
    stats.root_center = accumulate(buf);

    buf.clear();
    for (const RootVoxel& root : rep.forest.roots) buf.push_back(root.half_extent);
    stats.root_scale = accumulate(buf);

    buf.clear();
    for (const LocalGrid& grid : rep.grids)
        for (int k = 0; k < 3; ++k) buf.push_back(grid.center[k]);
    stats.grid_center = accumulate(buf);

    buf.clear();
    for (const LocalGrid& grid : rep.grids)
        for (int k = 0; k < 3; ++k) buf.push_back(grid.half_scales[k]);
    stats.grid_scale = accumulate(buf);
    return stats;
}

GalaStats load_stats_sidecar(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    GalaStats stats;
    bool seen[4] = {};
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string name;
        double lo, hi;
        if (!(ls >> name >> lo >> hi)) continue;
        if (name == "root_center") stats.root_center = {lo, hi}, seen[0] = true;
        else if (name == "root_scale") stats.root_scale = {lo, hi}, seen[1] = true;
        else if (name == "grid_center") stats.grid_center = {lo, hi}, seen[2] = true;
        else if (name == "grid_scale") stats.grid_scale = {lo, hi}, seen[3] = true;
        else throw IoError("unknown statistics domain: " + name);
    }
    if (!(seen[0] && seen[1] && seen[2] && seen[3]))
        throw IoError("incomplete statistics sidecar: " + path);
    return stats;
}

void save_stats_sidecar(const GalaStats& stats, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.precision(17);
    out << "root_center " << stats.root_center.lo << ' ' << stats.root_center.hi << '\n'
        << "root_scale " << stats.root_scale.lo << ' ' << stats.root_scale.hi << '\n'
        << "grid_center " << stats.grid_center.lo << ' ' << stats.grid_center.hi << '\n'
        << "grid_scale " << stats.grid_scale.lo << ' ' << stats.grid_scale.hi << '\n';
    if (!out) throw IoError("write failed: " + path);
}

void save_gala(const GalaRep& rep, const std::string& path) {
    if (!rep.quantized)
        throw InvalidInput("save_gala: representation must be quantized first");
    rep.params.validate();
    if (rep.params.root_count > 0xffff || rep.params.depth > 0xffff ||
        rep.params.grid_res > 0xffff || rep.params.hist_bins > 0xffff)
        throw InvalidInput("save_gala: hyperparameter exceeds field width");
    if (rep.codes.size() != rep.grids.size())
        throw InvalidInput("save_gala: missing quantization codes");

    const GalaStats stats = compute_stats(rep);
    const std::int64_t values_per_grid = rep.params.values_per_grid();

    Writer w;
    w.tag("GALA");
    w.u32(kGalaFormatVersion);
    w.u16(static_cast<std::uint16_t>(rep.params.root_count));
    w.u16(static_cast<std::uint16_t>(rep.params.depth));
    w.u16(static_cast<std::uint16_t>(rep.params.grid_res));
    w.u16(static_cast<std::uint16_t>(rep.params.hist_bins));
    w.f32(rep.params.alpha);
    w.u32(static_cast<std::uint32_t>(rep.grid_count()));
    w.u8(static_cast<std::uint8_t>(rep.mode));
    for (const DomainStats* d :
         {&stats.root_center, &stats.root_scale, &stats.grid_center,
          &stats.grid_scale}) {
        w.f32(static_cast<float>(d->lo));
        w.f32(static_cast<float>(d->hi));
    }

    for (const RootVoxel& root : rep.forest.roots) {
        for (int k = 0; k < 3; ++k) w.f32(static_cast<float>(root.center[k]));
        w.f32(static_cast<float>(root.half_extent));
    }

    std::int64_t previous_leaf = -1;
    for (std::size_t g = 0; g < rep.grids.size(); ++g) {
        const std::int64_t leaf = rep.grids[g].leaf_index;
        if (leaf <= previous_leaf)
            throw InvalidInput("save_gala: grids must be in ascending leaf order");
        previous_leaf = leaf;

        const GridCodes& codes = rep.codes[g];
        if (static_cast<std::int64_t>(codes.values.size()) != values_per_grid)
            throw InvalidInput("save_gala: value code count mismatch");

        w.u32(static_cast<std::uint32_t>(leaf / 8));
        w.u8(static_cast<std::uint8_t>(leaf % 8));
        for (int k = 0; k < 3; ++k) w.u8(codes.euler[k]);
        for (int k = 0; k < 3; ++k) w.u8(codes.scales[k]);
        for (int k = 0; k < 3; ++k) w.u8(codes.center[k]);
        w.bytes.insert(w.bytes.end(), codes.values.begin(), codes.values.end());
    }

    write_file(path, w.bytes);
}

GalaRep load_gala(const std::string& path) {
    const std::vector<std::uint8_t> bytes = read_file(path);
    Reader r{bytes.data(), bytes.size()};

    if (!r.tag("GALA")) throw IoError("bad magic: not a GALA file");
    const std::uint32_t version = r.u32();
    if (version > kGalaFormatVersion)
        throw IoError("unsupported format version " + std::to_string(version));

    Hyperparams params;
    params.root_count = r.u16();
    params.depth = r.u16();
    params.grid_res = r.u16();
    params.hist_bins = r.u16();
    params.alpha = r.f32();

    const std::uint32_t grid_count = r.u32();
    const std::uint8_t mode_byte = r.u8();

    try {
        params.validate();
    } catch (const InvalidInput& e) {
        throw IoError(std::string("invalid header: ") + e.what());
    }
    if (params.depth > 10) throw IoError("implausible depth in header");
    if (mode_byte > static_cast<std::uint8_t>(ExtractionMode::kNormalsHistogram))
        throw IoError("unknown extraction mode byte");

    const std::int64_t leaf_slots = params.leaf_slots();
    if (static_cast<std::int64_t>(grid_count) > leaf_slots)
        throw IoError("grid count exceeds leaf capacity");

    GalaStats stats;
    for (DomainStats* d : {&stats.root_center, &stats.root_scale,
                           &stats.grid_center, &stats.grid_scale}) {
        d->lo = r.f32();
        d->hi = r.f32();
        if (!std::isfinite(d->lo) || !std::isfinite(d->hi))
            throw IoError("non-finite statistics block");
    }

    std::vector<RootVoxel> roots(params.root_count);
    for (RootVoxel& root : roots) {
        for (int k = 0; k < 3; ++k) {
            const float v = r.f32();
            if (!std::isfinite(v)) throw IoError("non-finite root center");
            root.center[k] = v;
        }
        const float s = r.f32();
        if (!std::isfinite(s) || s <= 0.0f) throw IoError("invalid root scale");
        root.half_extent = s;
    }

    GalaRep rep;
    rep.params = params;
    rep.mode = static_cast<ExtractionMode>(mode_byte);
    rep.forest = subdivide(roots, params.alpha, params.depth);
    rep.grids.reserve(grid_count);
    rep.codes.reserve(grid_count);

    const std::int64_t parents = leaf_slots / 8;
    const std::int64_t values_per_grid = params.values_per_grid();
    std::int64_t previous_leaf = -1;
    for (std::uint32_t g = 0; g < grid_count; ++g) {
        const std::uint32_t parent = r.u32();
        const std::uint8_t sibling = r.u8();
        if (parent >= parents) throw IoError("parent index out of range");
        if (sibling >= 8) throw IoError("sibling index out of range");
        const std::int64_t leaf = static_cast<std::int64_t>(parent) * 8 + sibling;
        if (leaf <= previous_leaf)
            throw IoError("leaf records out of order or duplicated");
        previous_leaf = leaf;

        GridCodes codes;
        for (int k = 0; k < 3; ++k) {
            codes.euler[k] = r.u8();
            if (codes.euler[k] >= kEulerCodes)
                throw IoError("orientation code out of range");
        }
        for (int k = 0; k < 3; ++k) codes.scales[k] = r.u8();
        for (int k = 0; k < 3; ++k) codes.center[k] = r.u8();
        codes.values.resize(values_per_grid);
        r.require(codes.values.size());
        std::memcpy(codes.values.data(), r.data + r.pos, codes.values.size());
        r.pos += codes.values.size();

        const TreeNode& node = rep.forest.leaves()[leaf];
        LocalGrid grid;
        if (rep.mode == ExtractionMode::kNoAdaptive) {
            grid.leaf_index = leaf;
            grid.center = node.center;
            grid.half_scales = Vec3::Constant(node.half_extent);
            grid.values.resize(values_per_grid);
            for (std::int64_t k = 0; k < values_per_grid; ++k)
                grid.values[k] = dequantize(codes.values[k], kValueLo, kValueHi);
        } else {
            grid = grid_from_codes(codes, leaf, params.grid_res);
        }
        rep.forest.leaves()[leaf].non_empty = true;
        rep.grids.push_back(std::move(grid));
        rep.codes.push_back(std::move(codes));
    }

    if (r.pos != r.size) throw IoError("trailing bytes after payload");
    rep.quantized = true;
    return rep;
}

void export_generation_data(const GalaRep& rep, const std::string& path,
                            const GalaStats* dataset_stats) {
    if (!rep.quantized)
        throw InvalidInput("export_generation_data: representation must be quantized");
    const GalaStats stats = dataset_stats ? *dataset_stats : compute_stats(rep);
    const std::int64_t leaf_slots = rep.params.leaf_slots();
    const std::int64_t values_per_grid = rep.params.values_per_grid();

    Writer w;
    w.tag("GALX");
    w.u32(kGalaFormatVersion);
    w.u16(static_cast<std::uint16_t>(rep.params.root_count));
    w.u16(static_cast<std::uint16_t>(rep.params.depth));
    w.u16(static_cast<std::uint16_t>(rep.params.grid_res));
    w.u16(0);
    w.u32(static_cast<std::uint32_t>(leaf_slots));
    for (const DomainStats* d :
         {&stats.root_center, &stats.root_scale, &stats.grid_center,
          &stats.grid_scale}) {
        w.f64(d->lo);
        w.f64(d->hi);
    }

    for (const RootVoxel& root : rep.forest.roots) {
        for (int k = 0; k < 3; ++k)
            w.f64(normalize01(root.center[k], stats.root_center));
        w.f64(normalize01(root.half_extent, stats.root_scale));
    }

    // Slot -> grid mapping in (parent, sibling) order.
    std::vector<std::int64_t> slot_grid(leaf_slots, -1);
    for (std::size_t g = 0; g < rep.grids.size(); ++g)
        slot_grid[rep.grids[g].leaf_index] = static_cast<std::int64_t>(g);

    for (std::int64_t slot = 0; slot < leaf_slots; ++slot)
        w.u8(slot_grid[slot] >= 0 ? 1 : 0);

    for (std::int64_t slot = 0; slot < leaf_slots; ++slot) {
        if (slot_grid[slot] < 0) {
            for (int k = 0; k < 10; ++k) w.f64(0.0);
            continue;
        }
        const LocalGrid& grid = rep.grids[slot_grid[slot]];
        const auto q = grid.orientation.coeffs();  // x, y, z, w in [-1, 1]
        for (int k = 0; k < 4; ++k)
            w.f64(std::clamp((q[k] + 1.0) / 2.0, 0.0, 1.0));
        for (int k = 0; k < 3; ++k)
            w.f64(normalize01(grid.half_scales[k], stats.grid_scale));
        for (int k = 0; k < 3; ++k)
            w.f64(normalize01(grid.center[k], stats.grid_center));
    }

    for (std::int64_t slot = 0; slot < leaf_slots; ++slot) {
        if (slot_grid[slot] < 0) {
            for (std::int64_t k = 0; k < values_per_grid; ++k) w.f64(0.0);
            continue;
        }
        const GridCodes& codes = rep.codes[slot_grid[slot]];
        for (std::int64_t k = 0; k < values_per_grid; ++k)
            w.f64(codes.values[k] / 255.0);
    }

    write_file(path, w.bytes);
}

} // namespace gala
