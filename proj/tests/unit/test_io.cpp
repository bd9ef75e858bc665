#include "cqc/error.hpp"
#include "cqc/io.hpp"
#include "cqc/simlab.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace cqc;

namespace {

Dataset parse(const std::string& text)
{
    std::istringstream in(text);
    return io::parse_dataset_csv(in, "t.csv");
}

std::string error_of(const std::string& text)
{
    try {
        parse(text);
    } catch (const DataError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("csv ingestion")
{
    const auto d = parse("y,a,x1\n1.5,1,0.2\n-2,0,0.4\n0,1,1e-3\n");
    CHECK(d.size() == 3);
    CHECK(d.dim() == 1);
    CHECK(d.y(1) == -2.0);
    CHECK(d.x(2)[0] == 0.001);

    CHECK(parse("y,a,x1,x2,x3\n1,0,1,2,3\n").dim() == 3);

    // Column order is free and unknown columns are ignored.
    const auto shuffled = parse("x2,id,a,x1,y\n5,row1,1,4,9\n");
    CHECK(shuffled.y(0) == 9.0);
    CHECK(shuffled.x(0)[0] == 4.0);
    CHECK(shuffled.x(0)[1] == 5.0);
    CHECK(parse("y,a,x1\r\n1,0,2\r\n").x(0)[0] == 2.0);
}

TEST_CASE("csv errors name the line")
{
    CHECK(error_of("y,a,x1\n1,0,0\n1,1,0\n1,0,0\n1,1,0\n1,0,0\n1,2,0\n").find("line 7") != std::string::npos);
    CHECK(error_of("y,a,x1\n1,0,nan\n").find("line 2") != std::string::npos);
    CHECK(error_of("y,a,x1\n1,0\n").find("line 2") != std::string::npos);
    CHECK(error_of("y,a,x1\n1,0,abc\n").find("line 2") != std::string::npos);
    CHECK(error_of("y,x1\n1,0\n").find("'a'") != std::string::npos);
    CHECK(error_of("a,x1\n1,0\n").find("'y'") != std::string::npos);
    CHECK(error_of("y,a\n1,0\n").find("covariate") != std::string::npos);
    CHECK(error_of("y,a,x1,x3\n1,0,1,1\n").find("gaps") != std::string::npos);
    CHECK(error_of("").find("empty") != std::string::npos);
    CHECK(error_of("y,a,x1\n").find("no data") != std::string::npos);
    CHECK_THROWS_AS(io::read_dataset_csv("/nonexistent/file.csv"), DataError);
}

TEST_CASE("csv round trip is value-identical")
{
    const auto original = sample_dgp(DgpSpec::make(DgpFamily::tendim, 1.0, 3), 200, 8);
    const auto text = io::dataset_csv(original);
    const auto back = parse(text);
    REQUIRE(back.size() == original.size());
    REQUIRE(back.dim() == original.dim());
    for (std::size_t i = 0; i < back.size(); ++i) {
        REQUIRE(back.y(i) == original.y(i));
        REQUIRE(back.a(i) == original.a(i));
        for (std::size_t k = 0; k < back.dim(); ++k) REQUIRE(back.x(i)[k] == original.x(i)[k]);
    }
    CHECK(io::dataset_csv(back) == text);
}

TEST_CASE("shortest round-trip number formatting")
{
    CHECK(io::format_double(0.1) == "0.1");
    CHECK(io::format_double(2.0) == "2");
    const double awkward = 1.0 / 3.0;
    CHECK(std::stod(io::format_double(awkward)) == awkward);
}

TEST_CASE("surface csv layout")
{
    Surface s{{0.0, 1.0}, Points(1, {0.25, 0.75}), {1, 2, 3, 4}};
    CHECK(io::surface_csv(s) == "y,0.25,0.75\n0,1,2\n1,3,4\n");
}

TEST_CASE("atomic writes replace the file")
{
    const auto dir = std::filesystem::temp_directory_path() / "cqc_io_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "out.txt";
    io::write_file_atomic(path, "first");
    io::write_file_atomic(path, "second");
    std::ifstream in(path);
    std::string content((std::istreambuf_iterator<char>(in)), {});
    CHECK(content == "second");
    CHECK(!std::filesystem::exists(dir / "out.txt.tmp"));
    std::filesystem::remove_all(dir);
}
