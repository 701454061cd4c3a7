//! Walk one agent along a scripted path to the goal and print the reward of
//! every transition: a wall bump, an obstacle, plain moves and the goal.

use std::collections::BTreeSet;

use qardns::env::{extrinsic_reward, Cell, GridConfig, GridWorld, Move};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qardns::Result<()> {
    let config = GridConfig::default();
    println!("origin reward if stepped onto: {:.3}", extrinsic_reward(Cell::ORIGIN, false, &config));

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sampled = GridWorld::new(config.clone(), &mut rng)?;
    println!("sampled layout has {} obstacles", sampled.state().obstacles.len());

    let mut world = GridWorld::with_obstacles(config, BTreeSet::from([Cell::new(9, 4, 0)]));
    let mut path = vec![Move::Down];
    path.extend([Move::Right; 9]);
    path.extend([Move::Up; 4]);
    path.push(Move::UpZ);
    path.extend([Move::Up; 7]);
    path.extend([Move::UpZ; 2]);
    for m in path {
        let out = world.step(0, m)?;
        println!(
            "{m:?}: -> {} reward {:+.3}{}{}",
            out.next_position,
            out.extrinsic_reward,
            if out.collided { " (blocked)" } else { "" },
            if out.reached_goal { " GOAL" } else { "" }
        );
        world.tick();
        if out.reached_goal {
            break;
        }
    }

    world.set_episode_index(99);
    world.next_episode(&mut rng);
    println!("episode {}: obstacles refreshed, agents back at {}", world.state().episode_index, world.position(0));
    Ok(())
}
