#include <doctest.h>

#include <filesystem>

#include "bodycorr/descriptor.hpp"
#include "gradcheck.hpp"

using namespace bodycorr;

namespace {

NetworkParams<double> untrained_params(const NetConfig& cfg, std::uint64_t seed) {
    NetworkParams<double> params;
    params.tower = Tower<double>(cfg);
    RandomStream rng(seed);
    params.tower.init(rng);
    return params;
}

// A square foreground blob of varying depth placed at (top, left).
DepthImage blob_image(int size, int top, int left, int blob) {
    DepthImage image;
    image.width = image.height = size;
    image.depth = Eigen::VectorXd::Zero(size * size);
    image.mask.assign(static_cast<size_t>(size) * size, 0);
    for (int y = 0; y < blob; ++y) {
        for (int x = 0; x < blob; ++x) {
            const int pix = (top + y) * size + (left + x);
            image.depth[pix] = 2.0 + 0.05 * y + 0.03 * x + 0.01 * ((x * y) % 5);
            image.mask[static_cast<size_t>(pix)] = 1;
        }
    }
    return image;
}

}  // namespace

TEST_CASE("all-background image yields an empty field") {
    const NetConfig cfg = NetConfig::desk(32, 4);
    const NetworkParams<double> params = untrained_params(cfg, 1);
    DepthImage image;
    image.width = image.height = 32;
    image.depth = Eigen::VectorXd::Zero(32 * 32);
    image.mask.assign(32 * 32, 0);
    const DescriptorField field = extract_pixel_descriptors(params, image);
    CHECK(field.values.cwiseAbs().maxCoeff() == 0.0);
    for (auto m : field.mask) CHECK(m == 0);
}

TEST_CASE("extraction is deterministic and validates resolution") {
    const NetConfig cfg = NetConfig::desk(32, 4);
    const NetworkParams<double> params = untrained_params(cfg, 2);
    const DepthImage image = blob_image(32, 8, 10, 12);
    const DescriptorField a = extract_pixel_descriptors(params, image);
    const DescriptorField b = extract_pixel_descriptors(params, image);
    CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);

    const DepthImage wrong = blob_image(64, 8, 10, 12);
    CHECK_THROWS_AS(extract_pixel_descriptors(params, wrong), std::invalid_argument);
}

TEST_CASE("descriptors are shift-equivariant at the tower stride") {
    // Total downsampling factor of the desk schedule is 4; shifting the body
    // by 4 pixels must shift the descriptors by 4 pixels.
    const NetConfig cfg = NetConfig::desk(64, 6);
    const NetworkParams<double> params = untrained_params(cfg, 3);
    const int blob = 20, top = 18, left = 14, shift = 4;
    const DepthImage image = blob_image(64, top, left, blob);
    const DepthImage shifted = blob_image(64, top, left + shift, blob);

    const DescriptorField f0 = extract_pixel_descriptors(params, image);
    const DescriptorField f1 = extract_pixel_descriptors(params, shifted);
    for (int y = top; y < top + blob; ++y) {
        for (int x = left; x < left + blob; ++x) {
            const int pix = y * 64 + x;
            const int moved = y * 64 + x + shift;
            CHECK((f0.values.row(pix) - f1.values.row(moved)).cwiseAbs().maxCoeff() < 1e-9);
        }
    }
}

TEST_CASE("per-vertex averaging") {
    DescriptorField f1, f2;
    f1.width = f2.width = 2;
    f1.height = f2.height = 1;
    f1.d = f2.d = 3;
    f1.values.resize(2, 3);
    f2.values.resize(2, 3);
    f1.values << 1, 2, 3, 10, 20, 30;
    f2.values << 4, 8, 12, 0, 0, 0;
    f1.mask = {1, 1};
    f2.mask = {1, 0};

    RenderBuffers b1, b2;
    b1.width = b2.width = 2;
    b1.height = b2.height = 1;
    b1.nearest_vertex.resize(2);
    b2.nearest_vertex.resize(2);
    b1.nearest_vertex << 0, 1;   // view 1 sees vertices 0 and 1
    b2.nearest_vertex << 0, -1;  // view 2 sees vertex 0 only

    const VertexDescriptorTable table = per_vertex_descriptors({f1, f2}, {b1, b2}, 3);
    SUBCASE("two contributions average exactly") {
        CHECK(table.values(0, 0) == doctest::Approx(2.5).epsilon(1e-15));
        CHECK(table.values(0, 1) == doctest::Approx(5.0).epsilon(1e-15));
        CHECK(table.visibility[0] == 2);
    }
    SUBCASE("a single contribution is the identity average") {
        CHECK((table.values.row(1) - f1.values.row(1)).cwiseAbs().maxCoeff() == 0.0);
        CHECK(table.visibility[1] == 1);
    }
    SUBCASE("never-visible vertices are flagged unusable") {
        CHECK(table.visibility[2] == 0);
        CHECK_FALSE(table.usable(2));
        CHECK(table.usable(0));
    }
    SUBCASE("misaligned inputs throw") {
        CHECK_THROWS_AS(per_vertex_descriptors({f1}, {b1, b2}, 3), std::invalid_argument);
    }
}

TEST_CASE("averaging stays inside the contributing bounds") {
    RandomStream rng(9);
    const int pixels = 40, d = 5, vertices = 7;
    std::vector<DescriptorField> fields;
    std::vector<RenderBuffers> buffers;
    for (int view = 0; view < 3; ++view) {
        DescriptorField f;
        f.width = pixels;
        f.height = 1;
        f.d = d;
        f.values.resize(pixels, d);
        f.mask.assign(pixels, 1);
        RenderBuffers b;
        b.width = pixels;
        b.height = 1;
        b.nearest_vertex.resize(pixels);
        for (int p = 0; p < pixels; ++p) {
            for (int c = 0; c < d; ++c) f.values(p, c) = rng.normal();
            b.nearest_vertex[p] = rng.uniform_int(vertices + 1) - 1;  // -1 = background
        }
        fields.push_back(std::move(f));
        buffers.push_back(std::move(b));
    }
    const VertexDescriptorTable table = per_vertex_descriptors(fields, buffers, vertices);
    for (int v = 0; v < vertices; ++v) {
        if (!table.usable(v)) continue;
        for (int c = 0; c < d; ++c) {
            double lo = 1e300, hi = -1e300;
            for (int view = 0; view < 3; ++view) {
                for (int p = 0; p < pixels; ++p) {
                    if (buffers[static_cast<size_t>(view)].nearest_vertex[p] == v) {
                        lo = std::min(lo, fields[static_cast<size_t>(view)].values(p, c));
                        hi = std::max(hi, fields[static_cast<size_t>(view)].values(p, c));
                    }
                }
            }
            CHECK(table.values(v, c) >= lo - 1e-12);
            CHECK(table.values(v, c) <= hi + 1e-12);
        }
    }
}

TEST_CASE("field and table files round trip") {
    RandomStream rng(11);
    DescriptorField field;
    field.width = 6;
    field.height = 4;
    field.d = 3;
    field.values.resize(24, 3);
    field.mask.assign(24, 0);
    for (int p = 0; p < 24; ++p) {
        field.mask[static_cast<size_t>(p)] = rng.uniform() < 0.5 ? 1 : 0;
        for (int c = 0; c < 3; ++c) field.values(p, c) = rng.normal();
    }
    const std::string fpath = (std::filesystem::temp_directory_path() / "field.bin").string();
    write_descriptor_field(field, fpath);
    const DescriptorField f2 = read_descriptor_field(fpath);
    CHECK(f2.width == field.width);
    CHECK(f2.mask == field.mask);
    CHECK((f2.values - field.values).cwiseAbs().maxCoeff() == 0.0);

    VertexDescriptorTable table;
    table.values.resize(5, 3);
    table.visibility.resize(5);
    for (int v = 0; v < 5; ++v) {
        table.visibility[v] = rng.uniform_int(3);
        for (int c = 0; c < 3; ++c) table.values(v, c) = rng.normal();
    }
    const std::string tpath = (std::filesystem::temp_directory_path() / "table.bin").string();
    write_vertex_table(table, tpath);
    const VertexDescriptorTable t2 = read_vertex_table(tpath);
    CHECK((t2.values - table.values).cwiseAbs().maxCoeff() == 0.0);
    CHECK((t2.visibility - table.visibility).cwiseAbs().maxCoeff() == 0);
}
