#include "gala/tri_mesh.hpp"

#include "gala/rng.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <vector>

namespace gala {

namespace {

constexpr double kDegenerateArea = 1e-12;

Vec3 face_cross(const MatX3& v, const MatX3i& t, std::int64_t f) {
    const Vec3 a = v.row(t(f, 0));
    const Vec3 b = v.row(t(f, 1));
    const Vec3 c = v.row(t(f, 2));
    return (b - a).cross(c - a);
}

std::string lower_extension(const std::string& path) {
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return {};
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext;
}

} // namespace

TriMesh make_mesh(MatX3 vertices, MatX3i triangles) {
    const std::int64_t nv = vertices.rows();
    for (std::int64_t f = 0; f < triangles.rows(); ++f)
        for (int k = 0; k < 3; ++k)
            if (triangles(f, k) < 0 || triangles(f, k) >= nv)
                throw InvalidInput("triangle index out of range");

    TriMesh mesh;
    mesh.vertices = std::move(vertices);
    mesh.triangles = std::move(triangles);
    mesh.face_normals.resize(mesh.triangles.rows(), 3);
    for (std::int64_t f = 0; f < mesh.triangles.rows(); ++f) {
        const Vec3 n = face_cross(mesh.vertices, mesh.triangles, f);
        const double len = n.norm();
        if (len <= 0.0) throw InvalidInput("zero-area triangle");
        mesh.face_normals.row(f) = n / len;
    }
    return mesh;
}

double triangle_area(const TriMesh& mesh, std::int64_t face) {
    return 0.5 * face_cross(mesh.vertices, mesh.triangles, face).norm();
}

double surface_area(const TriMesh& mesh) {
    double area = 0.0;
    for (std::int64_t f = 0; f < mesh.triangle_count(); ++f)
        area += triangle_area(mesh, f);
    return area;
}

double signed_volume(const TriMesh& mesh) {
    double volume = 0.0;
    for (std::int64_t f = 0; f < mesh.triangle_count(); ++f) {
        const Vec3 a = mesh.vertices.row(mesh.triangles(f, 0));
        const Vec3 b = mesh.vertices.row(mesh.triangles(f, 1));
        const Vec3 c = mesh.vertices.row(mesh.triangles(f, 2));
        volume += a.dot(b.cross(c));
    }
    return volume / 6.0;
}

std::pair<Vec3, Vec3> bounding_box(const TriMesh& mesh) {
    if (mesh.vertex_count() == 0) throw InvalidInput("empty mesh");
    return {mesh.vertices.colwise().minCoeff().transpose(),
            mesh.vertices.colwise().maxCoeff().transpose()};
}

namespace {

TriMesh finalize_loaded(std::vector<Vec3>& vertices,
                        std::vector<Eigen::Vector3i>& faces) {
    MatX3 v(static_cast<std::int64_t>(vertices.size()), 3);
    for (std::size_t i = 0; i < vertices.size(); ++i) v.row(i) = vertices[i];

    // Drop degenerate faces before normal computation.
    std::vector<Eigen::Vector3i> kept;
    kept.reserve(faces.size());
    for (const auto& f : faces) {
        const Vec3 a = v.row(f[0]), b = v.row(f[1]), c = v.row(f[2]);
        if (0.5 * (b - a).cross(c - a).norm() > kDegenerateArea) kept.push_back(f);
    }
    if (kept.empty()) throw InvalidInput("mesh empty after degenerate-face filtering");

    MatX3i t(static_cast<std::int64_t>(kept.size()), 3);
    for (std::size_t i = 0; i < kept.size(); ++i) t.row(i) = kept[i];
    return make_mesh(std::move(v), std::move(t));
}

TriMesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    std::vector<Vec3> vertices;
    std::vector<Eigen::Vector3i> faces;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "v") {
            Vec3 p;
            if (!(ls >> p.x() >> p.y() >> p.z()))
                throw InvalidInput("malformed vertex line in " + path);
            vertices.push_back(p);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string item;
            while (ls >> item) {
                // "i", "i/t", "i//n", "i/t/n" — only the vertex index matters.
                const std::size_t slash = item.find('/');
                const std::string head = item.substr(0, slash);
                int i = 0;
                try {
                    i = std::stoi(head);
                } catch (const std::exception&) {
                    throw InvalidInput("malformed face line in " + path);
                }
                if (i <= 0) throw InvalidInput("unsupported face index in " + path);
                idx.push_back(i - 1);
            }
            if (idx.size() != 3) throw InvalidInput("non-triangular face in " + path);
            for (int i : idx)
                if (i >= static_cast<int>(vertices.size()))
                    throw InvalidInput("face index out of range in " + path);
            faces.emplace_back(idx[0], idx[1], idx[2]);
        }
    }
    if (faces.empty()) throw InvalidInput("no faces in " + path);
    return finalize_loaded(vertices, faces);
}

// STL carries an unindexed triangle soup; vertices with bit-identical
// coordinates are welded so that adjacency (needed for signed queries)
// survives the round trip.
struct VertexWelder {
    std::unordered_map<std::string, int> index;
    std::vector<Vec3> vertices;

    int add(float x, float y, float z) {
        std::string key(12, '\0');
        std::memcpy(key.data() + 0, &x, 4);
        std::memcpy(key.data() + 4, &y, 4);
        std::memcpy(key.data() + 8, &z, 4);
        auto [it, inserted] = index.try_emplace(key, static_cast<int>(vertices.size()));
        if (inserted) vertices.emplace_back(x, y, z);
        return it->second;
    }
};

TriMesh load_stl_binary(const std::string& path, std::ifstream& in) {
    in.seekg(80);
    std::uint32_t count = 0;
    in.read(reinterpret_cast<char*>(&count), 4);
    if (!in) throw IoError("truncated STL header in " + path);

    VertexWelder weld;
    std::vector<Eigen::Vector3i> faces;
    faces.reserve(count);
    for (std::uint32_t f = 0; f < count; ++f) {
        float rec[12];
        char attr[2];
        in.read(reinterpret_cast<char*>(rec), 48);
        in.read(attr, 2);
        if (!in) throw IoError("truncated STL record in " + path);
        const int a = weld.add(rec[3], rec[4], rec[5]);
        const int b = weld.add(rec[6], rec[7], rec[8]);
        const int c = weld.add(rec[9], rec[10], rec[11]);
        faces.emplace_back(a, b, c);
    }
    if (faces.empty()) throw InvalidInput("no faces in " + path);
    return finalize_loaded(weld.vertices, faces);
}

TriMesh load_stl_ascii(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    VertexWelder weld;
    std::vector<Eigen::Vector3i> faces;
    std::vector<int> pending;
    std::string tag;
    while (in >> tag) {
        if (tag == "vertex") {
            float x, y, z;
            if (!(in >> x >> y >> z)) throw InvalidInput("malformed STL vertex in " + path);
            pending.push_back(weld.add(x, y, z));
        } else if (tag == "endloop") {
            if (pending.size() != 3) throw InvalidInput("non-triangular face in " + path);
            faces.emplace_back(pending[0], pending[1], pending[2]);
            pending.clear();
        }
    }
    if (faces.empty()) throw InvalidInput("no faces in " + path);
    return finalize_loaded(weld.vertices, faces);
}

bool stl_looks_ascii(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char head[512] = {};
    in.read(head, sizeof(head));
    const std::string text(head, static_cast<std::size_t>(in.gcount()));
    return text.rfind("solid", 0) == 0 && text.find("facet") != std::string::npos;
}

} // namespace

TriMesh load_mesh(const std::string& path) {
    const std::string ext = lower_extension(path);
    if (ext == "obj") return load_obj(path);
    if (ext == "stl") {
        if (stl_looks_ascii(path)) return load_stl_ascii(path);
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open " + path);
        return load_stl_binary(path, in);
    }
    throw InvalidInput("unsupported mesh format: " + path);
}

void save_mesh(const TriMesh& mesh, const std::string& path) {
    const std::string ext = lower_extension(path);
    if (ext == "obj") {
        std::ofstream out(path);
        if (!out) throw IoError("cannot open " + path + " for writing");
        out.precision(17);
        for (std::int64_t i = 0; i < mesh.vertex_count(); ++i)
            out << "v " << mesh.vertices(i, 0) << ' ' << mesh.vertices(i, 1) << ' '
                << mesh.vertices(i, 2) << '\n';
        for (std::int64_t f = 0; f < mesh.triangle_count(); ++f)
            out << "f " << mesh.triangles(f, 0) + 1 << ' ' << mesh.triangles(f, 1) + 1
                << ' ' << mesh.triangles(f, 2) + 1 << '\n';
        if (!out) throw IoError("write failed: " + path);
        return;
    }
    if (ext == "stl") {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot open " + path + " for writing");
        char header[80] = {};
        std::snprintf(header, sizeof(header), "binary stl");
        out.write(header, 80);
        const std::uint32_t count = static_cast<std::uint32_t>(mesh.triangle_count());
        out.write(reinterpret_cast<const char*>(&count), 4);
        for (std::int64_t f = 0; f < mesh.triangle_count(); ++f) {
            float rec[12];
            for (int k = 0; k < 3; ++k)
                rec[k] = static_cast<float>(mesh.face_normals(f, k));
            for (int v = 0; v < 3; ++v)
                for (int k = 0; k < 3; ++k)
                    rec[3 + 3 * v + k] =
                        static_cast<float>(mesh.vertices(mesh.triangles(f, v), k));
            const char attr[2] = {0, 0};
            out.write(reinterpret_cast<const char*>(rec), 48);
            out.write(attr, 2);
        }
        if (!out) throw IoError("write failed: " + path);
        return;
    }
    throw InvalidInput("unsupported mesh format: " + path);
}

TriMesh normalize_mesh(const TriMesh& mesh) {
    if (mesh.empty()) throw InvalidInput("cannot normalize an empty mesh");
    const auto [lo, hi] = bounding_box(mesh);
    const Vec3 center = 0.5 * (lo + hi);
    const double diagonal = (hi - lo).norm();
    if (diagonal < 1e-15) throw InvalidInput("zero-extent mesh");

    TriMesh out = mesh;
    out.vertices.rowwise() -= center.transpose();
    out.vertices /= diagonal;
    return out;
}

SurfaceSamples sample_surface(const TriMesh& mesh, std::int64_t count,
                              std::uint64_t seed) {
    if (count < 1) throw InvalidInput("sample count must be >= 1");
    const std::int64_t nt = mesh.triangle_count();
    if (nt == 0) throw InvalidInput("cannot sample an empty mesh");

    std::vector<double> areas(nt);
    double total = 0.0;
    for (std::int64_t f = 0; f < nt; ++f) {
        areas[f] = triangle_area(mesh, f);
        total += areas[f];
    }
    if (total <= 0.0) throw InvalidInput("mesh has zero total area");

    // Largest-remainder apportionment: exact total, proportional shares.
    std::vector<std::int64_t> per_face(nt);
    std::vector<std::pair<double, std::int64_t>> remainders(nt);
    std::int64_t assigned = 0;
    for (std::int64_t f = 0; f < nt; ++f) {
        const double share = areas[f] / total * static_cast<double>(count);
        per_face[f] = static_cast<std::int64_t>(std::floor(share));
        assigned += per_face[f];
        remainders[f] = {share - std::floor(share), f};
    }
    std::sort(remainders.begin(), remainders.end(),
              [](const auto& a, const auto& b) {
                  if (a.first != b.first) return a.first > b.first;
                  return a.second < b.second;
              });
    for (std::int64_t k = 0; k < count - assigned; ++k)
        ++per_face[remainders[static_cast<std::size_t>(k)].second];

    std::vector<std::int64_t> offset(nt + 1, 0);
    for (std::int64_t f = 0; f < nt; ++f) offset[f + 1] = offset[f] + per_face[f];

    SurfaceSamples samples;
    samples.points.resize(count, 3);
    samples.normals.resize(count, 3);
    samples.source_face.resize(count);

    for (std::int64_t f = 0; f < nt; ++f) {
        if (per_face[f] == 0) continue;
        const Vec3 a = mesh.vertices.row(mesh.triangles(f, 0));
        const Vec3 b = mesh.vertices.row(mesh.triangles(f, 1));
        const Vec3 c = mesh.vertices.row(mesh.triangles(f, 2));
        SplitMix64 rng(mix_seed(seed, static_cast<std::uint64_t>(f)));
        for (std::int64_t k = 0; k < per_face[f]; ++k) {
            const double su = std::sqrt(rng.uniform());
            const double v = rng.uniform();
            const Vec3 p = (1.0 - su) * a + su * (1.0 - v) * b + su * v * c;
            const std::int64_t row = offset[f] + k;
            samples.points.row(row) = p;
            samples.normals.row(row) = mesh.face_normals.row(f);
            samples.source_face[row] = static_cast<int>(f);
        }
    }
    return samples;
}

} // namespace gala
