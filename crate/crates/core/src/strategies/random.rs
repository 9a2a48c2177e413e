use rand::seq::IteratorRandom;
use rand_chacha::ChaCha8Rng;

use crate::diffusion::SeedCommand;
use crate::strategies::{Decision, Observation, PatternCursor, Policy, SeedingPattern, Slot};

/// Follows a seeding pattern, drawing each step's seeds uniformly among eligible nodes.
#[derive(Clone, Debug)]
pub struct RandomPolicy {
    cursor: PatternCursor,
    rng: ChaCha8Rng,
}

impl RandomPolicy {
    pub fn new(pattern: SeedingPattern, rng: ChaCha8Rng) -> Self {
        RandomPolicy {
            cursor: PatternCursor::new(pattern),
            rng,
        }
    }
}

impl Policy for RandomPolicy {
    fn decide(&mut self, obs: &Observation<'_>) -> Decision {
        match self.cursor.advance(obs) {
            Slot::Done => Decision::Stop,
            Slot::Wait => Decision::Seed(SeedCommand::wait()),
            Slot::Seed(k) => {
                let picks = obs.eligible().choose_multiple(&mut self.rng, k);
                if picks.is_empty() {
                    Decision::Stop
                } else {
                    Decision::Seed(SeedCommand::new(picks))
                }
            }
        }
    }
}
