// Regenerates the demo inputs shipped under data/: a noisy synthetic
// mortality surface and a small annuity book.
//
//   longrisk_gen_demo [out_dir]

#include "longrisk/serialization.hpp"
#include "longrisk/synthetic.hpp"

#include <filesystem>
#include <iostream>

int main(int argc, char** argv) {
    const std::filesystem::path out_dir = argc > 1 ? argv[1] : "data";
    std::filesystem::create_directories(out_dir);

    longrisk::SyntheticWorldOptions world;
    world.cell_noise_sd = 0.01;
    world.seed = 42;
    const longrisk::MortalitySurface surface = longrisk::synthetic_surface(world);

    longrisk::SyntheticPortfolioOptions book;
    book.seed = 42;
    const longrisk::Portfolio portfolio = longrisk::synthetic_portfolio(book);

    const nlohmann::json provenance = {
        {"generator", "longrisk_gen_demo"},
        {"world_seed", world.seed},
        {"portfolio_seed", book.seed},
    };
    longrisk::write_surface_csv(out_dir / "mortality.csv", surface, provenance);
    longrisk::write_portfolio_csv(out_dir / "portfolio.csv", portfolio, provenance);

    std::cout << "wrote " << (out_dir / "mortality.csv").string() << " ("
              << surface.n_ages() << " ages x " << surface.n_years() << " years)\n"
              << "wrote " << (out_dir / "portfolio.csv").string() << " ("
              << portfolio.annuitants.size() << " annuitants, valuation year "
              << portfolio.valuation_year << ")\n";
    return 0;
}
